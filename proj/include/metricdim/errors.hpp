#pragma once

#include <stdexcept>
#include <string>

namespace metricdim {

/// Input lies outside the domain an operation is defined on
/// (point outside I^n, empty set, no admissible scale).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed argument: bad level, bad coordinate selection, bad window.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exact search ran past its configured budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied witness or certificate does not satisfy its contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace metricdim
