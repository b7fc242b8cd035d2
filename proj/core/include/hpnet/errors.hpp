#pragma once

#include <stdexcept>
#include <string>

namespace hpnet {

// Error categories map 1:1 onto CLI exit codes:
//   ConfigError -> 2, DataError -> 3, NumericalError -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid option/flag combinations, rejected run configurations.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed files, shape/dimension mismatches, unknown labels, digest mismatches.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Degenerate numerical configurations (e.g. all pairwise distances zero).
struct NumericalError : Error {
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace hpnet
