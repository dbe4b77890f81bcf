#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfm {

enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyBatchError : public ValidationError {
 public:
  EmptyBatchError() : ValidationError("empty batch: at least one instance is required") {}
};

// A required input (moment coefficients, learning rate, ...) is missing.
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// QR of a rank-deficient factor.
class DegenerateFactorError : public NumericalError {
 public:
  explicit DegenerateFactorError(const std::string& what,
                                 std::optional<int> iteration = std::nullopt)
      : NumericalError(iteration ? what + " (iteration " + std::to_string(*iteration) + ")"
                                 : what),
        iteration_(iteration) {}
  std::optional<int> iteration() const noexcept { return iteration_; }

 private:
  std::optional<int> iteration_;
};

// No usable gap between the k-th and (k+1)-th singular values.
class DegenerateSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SingularMomentSystemError : public NumericalError {
 public:
  SingularMomentSystemError(std::size_t coordinate, double determinant)
      : NumericalError("singular moment system at coordinate " + std::to_string(coordinate) +
                       ": |phi - 1 - kappa^2| = " + std::to_string(determinant) +
                       " is below tau_min"),
        coordinate_(coordinate),
        determinant_(determinant) {}
  std::size_t coordinate() const noexcept { return coordinate_; }
  double determinant() const noexcept { return determinant_; }

 private:
  std::size_t coordinate_;
  double determinant_;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mfm
