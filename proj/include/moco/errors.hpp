#pragma once

#include <stdexcept>
#include <string>

namespace moco {

// Broken precondition or shape contract inside the library.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad (kind, m, n) combination, unsupported options, mismatched checkpoints.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Enumeration / lattice / DP sizes beyond the allowed budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace moco
