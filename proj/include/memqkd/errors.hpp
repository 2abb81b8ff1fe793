#pragma once

#include <stdexcept>
#include <string>

namespace memqkd {

// Invalid parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A statistic could not be formed from the collected data (empty CHSH cell,
// no coincidences, ...). The CLI maps this to exit code 3.
class StatisticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a density matrix fails the physicality checks.
class NonPhysicalState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace memqkd
