#pragma once

#include <stdexcept>
#include <string>

namespace ssw {

// Categories map to CLI exit codes: FileError -> 2, ConfigError -> 3,
// DataError -> 4.

struct FileError : std::runtime_error {
    explicit FileError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ssw
