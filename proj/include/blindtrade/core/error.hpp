#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blindtrade {

/// Malformed or inconsistent input data. `line` is 1-based, 0 when not line-bound.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Violated operation precondition (bad sizes, windows outside the calendar, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Agent-supplied argument that cannot be resolved; surfaced as an invalid-argument tool failure.
class InvalidArgument : public std::invalid_argument {
public:
    InvalidArgument(const std::string& path, const std::string& what)
        : std::invalid_argument(path.empty() ? what : path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace blindtrade
