#pragma once

#include <stdexcept>
#include <string>

namespace polywave {

/// Bad user input: malformed config, invalid generator parameters, unknown keys.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: solver non-convergence, indefiniteness, degeneracy of 1-2k*psi_dot.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File IO failure: unreadable path, parse error (message carries the line number).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace polywave
