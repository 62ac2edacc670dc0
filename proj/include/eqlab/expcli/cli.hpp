#pragma once

#include <iosfwd>

namespace eqlab {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitAssert = 3 };

// Subcommands: sweep, figure1, equiv, oracle, packing, shatter, bayes, plot.
// Results go to --out (default `out`); progress and summaries to `log`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace eqlab
