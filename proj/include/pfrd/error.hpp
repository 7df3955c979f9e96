#pragma once

#include <stdexcept>
#include <string>

namespace pfrd {

/// Invalid or inconsistent configuration. `path()` names the offending
/// `section.key` when one applies.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& message, std::string path = {})
        : std::invalid_argument(path.empty() ? message : path + ": " + message),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Non-finite values outside the blow-up protocol.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pfrd
