#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncslice {

// Invalid configuration values (slicing index, rates, budgets).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An object was used before it reached the state the call requires.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A coded packet was handed to the decoder of another generation.
class RoutingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller broke a documented precondition (e.g. two sends on one link in one slot).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Simulation exceeded its slot cap before every packet became terminal.
class RunAbortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotDecodableError : public std::runtime_error {
 public:
  explicit NotDecodableError(std::size_t missing)
      : std::runtime_error("generation not decodable, missing " +
                           std::to_string(missing) + " degrees of freedom"),
        missing_dof_(missing) {}

  std::size_t missing_dof() const noexcept { return missing_dof_; }

 private:
  std::size_t missing_dof_;
};

}  // namespace ncslice
