#pragma once

#include <stdexcept>
#include <string>

namespace gffpin {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Invalid configuration or size/budget guard tripped.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Wall-clock budget exhausted during an experiment run.
struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gffpin
