#pragma once

#include <stdexcept>
#include <string>

namespace zsplit {

/// Input content failed a schema or invariant check (malformed row, bad
/// label value, inconsistent split file, prediction out of range, ...).
/// Distinct from plain std::runtime_error so callers can map it to a
/// dedicated exit status.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace zsplit
