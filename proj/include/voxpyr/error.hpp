#pragma once

#include <stdexcept>
#include <string>

namespace voxpyr {

/// Base error for all library failures.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line (or row) where parsing stopped.
struct parse_error : error {
    parse_error(const std::string& msg, long line)
        : error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    long line;
};

/// Bad arguments or preconditions the caller can fix (maps to CLI exit code 2).
struct usage_error : error {
    using error::error;
};

}  // namespace voxpyr
