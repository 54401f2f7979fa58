#pragma once

#include <stdexcept>
#include <string>

namespace modalsyn {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape, range, ordering).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A matrix that must be factorized turned out singular or indefinite.
class SingularSystem : public Error {
public:
    using Error::Error;
};

/// Malformed problem or bundle file. `where` names the offending field.
class ParseError : public Error {
public:
    ParseError(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace modalsyn
