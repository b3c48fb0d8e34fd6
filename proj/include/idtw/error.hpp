#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idtw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input (KB files, config files, CSV). Carries a 1-based position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        std::string out = "line " + std::to_string(line);
        if (column > 0) out += ", column " + std::to_string(column);
        return out + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

// Well-formed input that violates a knowledge-base invariant.
class KbError : public Error {
public:
    using Error::Error;
};

// A value that falls outside every declared state range.
class OutOfRangeError : public KbError {
public:
    using KbError::KbError;
};

// Inconsistent experiment or matching configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Data that cannot be used for the requested computation (empty rows, single-class folds, ...).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace idtw
