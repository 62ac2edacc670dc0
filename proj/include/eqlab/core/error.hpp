#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of vectors, matrices, or weight objects do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument violates an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int step, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Newton's Hessian could not be inverted even after the ridge shift.
class SingularHessianError : public Error {
 public:
  SingularHessianError(double condition, const std::string& what)
      : Error(what + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition_number() const { return condition_; }

 private:
  double condition_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eqlab
