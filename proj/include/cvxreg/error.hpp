#pragma once

#include <stdexcept>
#include <string>

namespace cvxreg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input: bad dimensions, parse failures,
/// invalid configuration values.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Input that is well-formed but mathematically degenerate (constant
/// columns, zero scales, undefined smoothing temperature).
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// The design cannot be fitted: duplicate covariate rows, singular
/// per-point Gram matrices, too few points for the dimension.
class FitError : public InputError {
 public:
  using InputError::InputError;
};

/// Floating-point breakdown during a computation (NaN iterates, root
/// finder failure, LP pivot limit).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvxreg
