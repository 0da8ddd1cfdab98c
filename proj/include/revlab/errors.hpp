#pragma once

#include <stdexcept>

namespace revlab {

// Masked-row access or an inconsistent builder.
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hyperparameters outside the admissible ranges of a family.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation would exceed its configured budget (rows, samples, nodes).
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace revlab
