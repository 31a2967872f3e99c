#pragma once

#include <stdexcept>
#include <string>

namespace k3arith {

/// Raised when an argument violates an operation's precondition
/// (unknown lattice name, non-isotropic vector, Katz condition, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when truncated p-adic data cannot certify a result.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace k3arith
