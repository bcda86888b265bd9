#pragma once

#include <stdexcept>
#include <string>

namespace lcq {

/// NaN, divergence, or a violated numerical invariant at run time.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration input (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lcq
