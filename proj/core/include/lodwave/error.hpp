#pragma once

#include <stdexcept>
#include <string>

namespace lodwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index or parameter outside its admissible range.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Two meshes are not nested the way an operation requires.
class NestingError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric argument (bounds, ranges, non-positive values).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message names the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Factorisation breakdown or failed post-solve residual check.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Explicit time stepping blew up.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace lodwave
