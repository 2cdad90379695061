#pragma once

#include <stdexcept>
#include <string>

namespace modnet {

// Bad input data: unreadable files, schema violations, shape conflicts
// between a checkpoint and a dataset. CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: NaN/Inf surfacing mid-run, failed gradient check.
// CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace modnet
