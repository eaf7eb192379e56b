#pragma once

#include <stdexcept>
#include <string>

namespace gasrl {

// Error categories map 1:1 onto CLI exit codes (1, 2, 3).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericFault : std::runtime_error {
    explicit NumericFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gasrl
