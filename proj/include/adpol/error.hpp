#pragma once

#include <stdexcept>
#include <string>

namespace adpol {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad parameter, dimension mismatch).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The operation has no solution for the given arguments.
class NoSolution : public Error {
 public:
  using Error::Error;
};

/// A geodesic left the coordinate patch of its model.
class ChartExit : public Error {
 public:
  using Error::Error;
};

/// A complexified quantity was requested outside its analyticity domain.
class AnalyticityDomainError : public Error {
 public:
  using Error::Error;
};

/// The ODE integrator could not make progress (step underflow, step budget).
class IntegratorFailure : public Error {
 public:
  using Error::Error;
};

/// The solution exceeded the overflow guard.
class BlowupError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Im(phi) is too ill-conditioned to define a complex structure.
class DegeneratePolarization : public Error {
 public:
  using Error::Error;
};

/// The requested parameter is outside what is implemented (e.g. P(infinity)).
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Scenario / command-line configuration problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace adpol
