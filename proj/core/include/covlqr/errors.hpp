#pragma once

#include <stdexcept>
#include <string>

namespace covlqr {

/// Shapes of the operands of an operation do not agree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A closed-loop matrix has spectral radius >= 1, so the steady-state
/// covariance does not exist. Carries the offending radius.
class NotStable : public std::runtime_error {
 public:
  NotStable(const std::string& what, double radius)
      : std::runtime_error(what), radius_(radius) {}
  double radius() const { return radius_; }

 private:
  double radius_;
};

/// A linear system is too badly conditioned to be solved reliably.
class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sample covariance is not positive definite (persistency of
/// excitation fails).
class SingularPhi : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method hit its iteration cap.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, long iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

/// Malformed input file. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Invalid user configuration (bad keys, out-of-range values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covlqr
