#pragma once

#include <stdexcept>
#include <string>

namespace lkit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A feature set cannot run on the given object (missing function, missing grid, ...).
class Unavailable : public Error {
public:
    using Error::Error;
};

/// Expression text that does not parse. `position` is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Runtime failure while evaluating an expression (division by zero, log of a non-positive value).
class EvaluationError : public Error {
public:
    using Error::Error;
};

} // namespace lkit
