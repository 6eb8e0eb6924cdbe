#pragma once

#include <stdexcept>
#include <string>

namespace nmfvar {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    input = 2,     // malformed or missing data
    config = 3,    // infeasible or inconsistent settings
    numeric = 4,   // NaN, division by zero, non-convergence
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

} // namespace nmfvar
