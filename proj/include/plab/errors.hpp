#pragma once

#include <stdexcept>
#include <string>

namespace plab {

/// Input outside the mathematical domain of an operation (negative radius,
/// p <= 1, alpha <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Jacobian evaluated where it does not exist (DA(0) for p < 2).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Too few grid nodes to resolve a ball or a dyadic ladder.
class InsufficientResolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smoothness or experiment parameters that violate an admissibility condition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class NumericalBreakdown : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

/// Rotated flux field is not curl free enough to admit a stream function.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plab
