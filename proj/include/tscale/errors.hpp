#pragma once

#include <stdexcept>
#include <string>

namespace tscale {

// Bad input values: invalid shapes, out-of-range scores, unknown keys.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an exact count does not fit in 64 bits.
class OverflowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Unreadable or unwritable files. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tscale
