#pragma once

#include <stdexcept>

namespace switchback {

// Error taxonomy maps onto CLI exit codes: SpecError and DataError exit with 2,
// NumericError with 3. Usage problems are handled by the argument parser (1).

// Violated precondition or invalid configuration.
struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singular systems, degenerate denominators and similar runtime failures.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace switchback
