#pragma once

#include <stdexcept>
#include <string>

namespace chern {

/// Base of every error raised by the library. Each category maps onto one
/// process exit code of the `chern` tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* category() const noexcept { return "error"; }
};

/// Malformed input: bad grid parameters, violated declared bounds, unreadable files.
class ConfigurationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* category() const noexcept override { return "config"; }
};

/// A point or parameter outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* category() const noexcept override { return "domain"; }
};

/// An iteration cap was hit before the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }
  int exit_code() const noexcept override { return 2; }
  const char* category() const noexcept override { return "convergence"; }

 private:
  double best_residual_;
};

/// The monotone chain left the barrier sandwich: λ too small or a barrier is invalid.
class MonotonicityError : public ConvergenceError {
 public:
  MonotonicityError(const std::string& what, double violation)
      : ConvergenceError(what, violation) {}
  const char* category() const noexcept override { return "monotonicity"; }
};

/// A constructed sub/supersolution failed its own stencil check.
class BarrierConstructionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* category() const noexcept override { return "barrier"; }
};

}  // namespace chern
