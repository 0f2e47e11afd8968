#pragma once

#include <stdexcept>
#include <string>

namespace rfsr {

// Bad user-supplied parameters (M = 0, non-positive bandwidth, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested matrix would exceed the configured memory/size caps.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Factorization failure, divergence, eigensolver non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfsr
