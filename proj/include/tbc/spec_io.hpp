#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbc/value.hpp"

namespace tbc {

/// One declared parameter (or the output declaration).
///
/// Numeric kinds carry inclusive `[min, max]` bounds; integer bounds are truncated toward
/// zero when read. String parameters enumerate their admissible literals in `values`.
/// Bounds restrict input *generation* only: parsed test files may lie outside them.
struct ParamSpec {
    std::string name;
    ValueKind kind = ValueKind::Double;
    std::optional<double> min;
    std::optional<double> max;
    std::vector<std::string> values;

    bool operator==(const ParamSpec&) const = default;
};

/// The tool's only knowledge of a system under test.
struct InterfaceSpec {
    std::string command;
    std::vector<ParamSpec> parameters;
    ParamSpec output;

    std::size_t arity() const noexcept { return parameters.size(); }

    bool operator==(const InterfaceSpec&) const = default;
};

/// Parses and validates the JSON interface document. Accepts `min`/`max` either as numbers
/// or as numeric strings, and `output` either as a one-element array or as an object.
///
/// Throws ParseError (with byte offset) for malformed JSON and ValidationError naming the
/// offending field for unknown kinds, missing or inverted bounds, and duplicate names.
InterfaceSpec parse_interface_spec(std::string_view text);

/// Re-checks every InterfaceSpec invariant; throws ValidationError on the first violation.
void validate(const InterfaceSpec& spec);

/// Emits the JSON interface document (bounds written as numbers).
std::string write_interface_spec(const InterfaceSpec& spec);

/// One InputVector per non-empty line; blank lines and `#` comments are skipped.
/// Throws ParseError carrying the 1-based line number on arity or token errors.
std::vector<InputVector> parse_test_inputs(std::string_view text, const InterfaceSpec& spec);

/// Parses a single whitespace-separated token as a value of `param`'s kind, or nullopt.
std::optional<Value> parse_value(std::string_view token, const ParamSpec& param);

/// Inverse of parse_test_inputs: one line per vector, single spaces, trailing newline.
/// Throws std::invalid_argument when arities differ.
std::string write_test_inputs(const std::vector<InputVector>& inputs);

/// Checks arity, per-parameter kind and string enumeration membership.
bool conforms(const InputVector& input, const InterfaceSpec& spec) noexcept;

/// As conforms(), additionally requiring numeric values inside their declared bounds.
bool within_bounds(const InputVector& input, const InterfaceSpec& spec) noexcept;

/// Every enumerated string literal across all string parameters, in declaration order,
/// deduplicated. Indices into this table identify string values inside expression trees.
std::vector<std::string> string_table(const InterfaceSpec& spec);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);

} // namespace tbc
