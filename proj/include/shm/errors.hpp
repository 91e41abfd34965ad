#pragma once

#include <stdexcept>
#include <string>

namespace shm {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Sample vector does not match the time grid it is paired with.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A sample could not be snapped to any admissible level.
struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A signal violates the staircase invariants; `index` is the first offending waveform index.
struct ValidationError : std::runtime_error {
  ValidationError(const std::string& what, int index) : std::runtime_error(what), index(index) {}
  int index;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exhaustive search refused because the assignment count exceeds the budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shm
