#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbc {

/// Malformed input text. `position` is a byte offset for JSON documents and a
/// 1-based line number for test-input files; `line()` is non-zero only for the latter.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position, std::size_t line = 0)
        : std::runtime_error(what), position_(position), line_(line) {}

    std::size_t position() const noexcept { return position_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t position_;
    std::size_t line_;
};

/// Well-formed input that violates a declared constraint. `field` names the offender,
/// e.g. `parameters[1].min`.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A structurally malformed expression tree (unbound variable, kind mismatch).
class EvalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A system under test could not produce an output.
class ExecutionError : public std::runtime_error {
public:
    ExecutionError(const std::string& what, std::string command_line, std::string captured)
        : std::runtime_error(what), command_line_(std::move(command_line)), captured_(std::move(captured)) {}
    explicit ExecutionError(const std::string& what) : std::runtime_error(what) {}

    const std::string& command_line() const noexcept { return command_line_; }
    const std::string& captured_output() const noexcept { return captured_; }

private:
    std::string command_line_;
    std::string captured_;
};

} // namespace tbc
