#include "tbc/value.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace tbc {

std::string_view kind_name(ValueKind kind) noexcept {
    switch (kind) {
    case ValueKind::Double: return "double";
    case ValueKind::Integer: return "integer";
    case ValueKind::Boolean: return "boolean";
    case ValueKind::String: return "string";
    }
    return "?";
}

char kind_letter(ValueKind kind) noexcept {
    switch (kind) {
    case ValueKind::Double: return 'D';
    case ValueKind::Integer: return 'I';
    case ValueKind::Boolean: return 'B';
    case ValueKind::String: return 'S';
    }
    return '?';
}

ValueKind kind_of(const Value& value) noexcept {
    return static_cast<ValueKind>(value.index());
}

double numeric_value(const Value& value) noexcept {
    switch (kind_of(value)) {
    case ValueKind::Double: return std::get<double>(value);
    case ValueKind::Integer: return static_cast<double>(std::get<std::int64_t>(value));
    case ValueKind::Boolean: return std::get<bool>(value) ? 1.0 : 0.0;
    case ValueKind::String: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, end);
}

std::string format_value(const Value& value) {
    switch (kind_of(value)) {
    case ValueKind::Double: return format_double(std::get<double>(value));
    case ValueKind::Integer: return std::to_string(std::get<std::int64_t>(value));
    case ValueKind::Boolean: return std::get<bool>(value) ? "true" : "false";
    case ValueKind::String: return std::get<std::string>(value);
    }
    return {};
}

std::string format_input(const InputVector& input) {
    std::string line;
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (i > 0) {
            line += ' ';
        }
        line += format_value(input[i]);
    }
    return line;
}

} // namespace tbc
