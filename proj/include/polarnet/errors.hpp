#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polarnet {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input rows that cannot be parsed. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Arguments or data that violate a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A metric whose value does not exist for the given input (empty layer,
/// zero entropy margin, constant sample...).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// A computed value left its mathematically admissible range.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace polarnet
