#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlts {

// Error categories map onto CLI exit codes: argument/domain -> 2,
// estimation/numerical -> 3, I/O -> 4.

class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the domain of a transformed-linear operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Too few exceedances, degenerate samples and the like.
class EstimationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A Toeplitz/TPDF system that is not positive definite.
class SingularityError : public NumericalError {
public:
  SingularityError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string& what, double last_delta)
      : NumericalError(what), last_delta_(last_delta) {}
  double last_delta() const noexcept { return last_delta_; }

private:
  double last_delta_;
};

class DecompositionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace tlts
