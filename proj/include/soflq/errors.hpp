#pragma once

#include <stdexcept>
#include <string>

namespace soflq {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Incompatible or non-square matrix dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be symmetric is not (beyond the allowed slack).
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Scalar argument outside its admissible range (nonpositive step, radius, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A plant definition violates one of its invariants; message names the field.
class InvalidPlantError : public Error {
 public:
  using Error::Error;
};

/// A closed loop (or Lyapunov coefficient) has spectral radius >= 1.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double rho) : Error(what), rho_(rho) {}
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// Iterative solver failed to converge or produced an inconsistent result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Riccati value iteration diverged; (A, B) is likely not stabilizable.
class StabilizabilityError : public Error {
 public:
  using Error::Error;
};

/// A size cap was exceeded (e.g. full Hessian dimension).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is not defined for this plant (e.g. C not square).
class ApplicabilityError : public Error {
 public:
  using Error::Error;
};

/// Gradient norm too large for a stationary-point operation.
class NotStationaryError : public Error {
 public:
  NotStationaryError(const std::string& what, double gradnorm)
      : Error(what), gradnorm_(gradnorm) {}
  double gradnorm() const { return gradnorm_; }

 private:
  double gradnorm_;
};

/// Hessian at the candidate point is not positive definite.
class SaddleError : public Error {
 public:
  using Error::Error;
};

/// Cost exceeds the sublevel value an operation was asked to certify against.
class SublevelError : public Error {
 public:
  using Error::Error;
};

/// Smoothing radius keeps producing unstabilizing perturbations.
class SmoothingRadiusError : public Error {
 public:
  using Error::Error;
};

/// Config file parse or field-level validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while writing an artifact.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace soflq
