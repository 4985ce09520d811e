#pragma once

#include <stdexcept>
#include <string>

namespace cmdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: a model that breaks its invariants, a bad file, or a
/// configuration outside its documented domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter outside its admissible range.
class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A runtime check of a proven inequality failed. Carries the macro step.
class AssertionFailure : public Error {
 public:
  AssertionFailure(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// A linear solve whose residual exceeded its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmdp
