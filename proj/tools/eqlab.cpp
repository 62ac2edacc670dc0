#include <iostream>

#include "eqlab/expcli/cli.hpp"

int main(int argc, char** argv) { return eqlab::run_cli(argc, argv, std::cout, std::cerr); }
