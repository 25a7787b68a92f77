#pragma once

#include <stdexcept>
#include <string>

namespace hoc {

/// Malformed input: invalid probabilities, index out of range, mismatched spaces.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed the configured enumeration or work budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical precondition of an operation does not hold for the given input.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hoc
