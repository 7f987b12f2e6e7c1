#pragma once

#include <stdexcept>
#include <string>

namespace ulfkit {

// Precondition violated by the caller (bad size, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but carries no usable information (constant series,
// all-zero spectrum, empty realization).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. The message names the offending row.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown: singular systems, non-invertible covariances.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ulfkit
