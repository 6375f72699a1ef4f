#pragma once

#include <stdexcept>
#include <string>

namespace pinnfdm {

/// Raised when a computation produces NaN/Inf (source evaluation, residual,
/// loss). Precondition violations use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pinnfdm
