#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freerel {

/// A caller broke an operation's contract: bad shape, wrong field, missing
/// precondition. The CLI maps these to usage errors.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// An internal consistency check failed. Seeing one of these means the
/// implementation computed something a proven statement rules out.
class InvariantViolation : public std::logic_error {
public:
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

/// A resource guard (basis size, matrix fill) tripped before work started.
class ResourceLimit : public std::runtime_error {
public:
    explicit ResourceLimit(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax error in one of the text formats, with a 1-based source location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace freerel
