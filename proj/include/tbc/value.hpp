#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tbc {

/// The four primitive kinds a parameter, terminal or operator result can carry.
enum class ValueKind : std::uint8_t { Double, Integer, Boolean, String };

inline constexpr int kKindCount = 4;

std::string_view kind_name(ValueKind kind) noexcept;
char kind_letter(ValueKind kind) noexcept;

/// One typed argument value. Alternative order mirrors ValueKind.
using Value = std::variant<double, std::int64_t, bool, std::string>;

/// Position-aligned with InterfaceSpec::parameters.
using InputVector = std::vector<Value>;

/// All randomness in the library flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

ValueKind kind_of(const Value& value) noexcept;

/// Numeric view used by distances and model predictions: integers as reals, booleans as 0/1.
/// Strings have no numeric view and yield NaN.
double numeric_value(const Value& value) noexcept;

/// Shortest text that parses back to the identical double (`1.7`, `50`, `-inf`, `nan`).
std::string format_double(double value);

/// Test-file rendering of a single value.
std::string format_value(const Value& value);

/// Space-separated rendering of one input vector, without trailing newline.
std::string format_input(const InputVector& input);

} // namespace tbc
