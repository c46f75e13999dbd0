#pragma once

#include <stdexcept>
#include <string>

namespace maas {

// Configuration / input documents that fail validation. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration or solver budgets exceeded. CLI maps this to exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct InvalidRangeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownLabelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MissingAttributeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoSupplierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolicyViolationError : std::logic_error {
  using std::logic_error::logic_error;
};

struct MalformedProgramError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidUtilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace maas
