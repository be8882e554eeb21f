#pragma once

#include <stdexcept>
#include <string>

namespace resconv {

// Dimension mismatch; message names the offending axis.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the admissible range (bounds, filter sizes, domains).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure such as non-finite values during training.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported serialized input; message carries the JSON path.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace resconv
