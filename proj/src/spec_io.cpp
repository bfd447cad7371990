#include "tbc/spec_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tbc/errors.hpp"

namespace tbc {
namespace {

using nlohmann::json;

std::optional<ValueKind> kind_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "double" || lower == "float" || lower == "real") {
        return ValueKind::Double;
    }
    if (lower == "integer" || lower == "int" || lower == "long") {
        return ValueKind::Integer;
    }
    if (lower == "boolean" || lower == "bool") {
        return ValueKind::Boolean;
    }
    if (lower == "string") {
        return ValueKind::String;
    }
    return std::nullopt;
}

std::optional<double> parse_double_token(std::string_view token) {
    if (token.empty()) {
        return std::nullopt;
    }
    // from_chars rejects a leading '+'
    if (token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<double> read_bound(const json& node, const std::string& field) {
    if (node.is_null()) {
        return std::nullopt;
    }
    if (node.is_number()) {
        return node.get<double>();
    }
    if (node.is_string()) {
        auto text = node.get<std::string>();
        auto parsed = parse_double_token(text);
        if (!parsed) {
            throw ValidationError(field, "not a number: \"" + text + "\"");
        }
        return parsed;
    }
    throw ValidationError(field, "expected a number or numeric string");
}

ParamSpec read_param(const json& node, const std::string& where, bool is_output) {
    if (!node.is_object()) {
        throw ValidationError(where, "expected an object");
    }
    ParamSpec param;
    if (!node.contains("name") || !node["name"].is_string() || node["name"].get<std::string>().empty()) {
        throw ValidationError(where + ".name", "missing or empty");
    }
    param.name = node["name"].get<std::string>();
    if (!node.contains("type") || !node["type"].is_string()) {
        throw ValidationError(where + ".type", "missing");
    }
    auto kind = kind_from_name(node["type"].get<std::string>());
    if (!kind) {
        throw ValidationError(where + ".type", "unknown kind \"" + node["type"].get<std::string>() + "\"");
    }
    param.kind = *kind;

    if (is_output) {
        if (param.kind != ValueKind::Double && param.kind != ValueKind::Integer) {
            throw ValidationError(where + ".type", "output must be double or integer");
        }
        return param;
    }

    if (node.contains("min")) {
        param.min = read_bound(node["min"], where + ".min");
    }
    if (node.contains("max")) {
        param.max = read_bound(node["max"], where + ".max");
    }
    if (node.contains("values")) {
        if (!node["values"].is_array()) {
            throw ValidationError(where + ".values", "expected an array of strings");
        }
        for (const auto& v : node["values"]) {
            if (!v.is_string()) {
                throw ValidationError(where + ".values", "expected an array of strings");
            }
            param.values.push_back(v.get<std::string>());
        }
    }
    if (param.kind == ValueKind::Integer) {
        if (param.min) {
            param.min = std::trunc(*param.min);
        }
        if (param.max) {
            param.max = std::trunc(*param.max);
        }
    }
    return param;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            tokens.push_back(line.substr(start, i - start));
        }
    }
    return tokens;
}

} // namespace

void validate(const InterfaceSpec& spec) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
        const auto& p = spec.parameters[i];
        const std::string where = "parameters[" + std::to_string(i) + "]";
        if (p.name.empty()) {
            throw ValidationError(where + ".name", "missing or empty");
        }
        if (!names.insert(p.name).second) {
            throw ValidationError(where + ".name", "duplicate parameter name \"" + p.name + "\"");
        }
        switch (p.kind) {
        case ValueKind::Double:
        case ValueKind::Integer:
            if (!p.min) {
                throw ValidationError(where + ".min", "numeric parameter \"" + p.name + "\" requires a lower bound");
            }
            if (!p.max) {
                throw ValidationError(where + ".max", "numeric parameter \"" + p.name + "\" requires an upper bound");
            }
            if (!std::isfinite(*p.min) || !std::isfinite(*p.max)) {
                throw ValidationError(where + ".min", "bounds must be finite");
            }
            if (*p.min > *p.max) {
                throw ValidationError(where + ".min", "min exceeds max for \"" + p.name + "\"");
            }
            break;
        case ValueKind::String:
            if (p.values.empty()) {
                throw ValidationError(where + ".values", "string parameter \"" + p.name + "\" requires enumerated values");
            }
            for (const auto& v : p.values) {
                if (v.empty() || std::any_of(v.begin(), v.end(), [](unsigned char c) { return std::isspace(c); })) {
                    throw ValidationError(where + ".values", "string literals must be non-empty and contain no whitespace");
                }
            }
            break;
        case ValueKind::Boolean:
            break;
        }
    }
    if (spec.output.kind != ValueKind::Double && spec.output.kind != ValueKind::Integer) {
        throw ValidationError("output.type", "output must be double or integer");
    }
}

InterfaceSpec parse_interface_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed interface specification: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) {
        throw ParseError("interface specification must be a JSON object", 0);
    }

    InterfaceSpec spec;
    if (!doc.contains("command") || !doc["command"].is_string()) {
        throw ValidationError("command", "missing");
    }
    spec.command = doc["command"].get<std::string>();

    if (!doc.contains("parameters") || !doc["parameters"].is_array()) {
        throw ValidationError("parameters", "missing or not an array");
    }
    const auto& params = doc["parameters"];
    for (std::size_t i = 0; i < params.size(); ++i) {
        spec.parameters.push_back(read_param(params[i], "parameters[" + std::to_string(i) + "]", false));
    }

    if (!doc.contains("output")) {
        throw ValidationError("output", "missing");
    }
    const auto& out = doc["output"];
    if (out.is_array()) {
        if (out.size() != 1) {
            throw ValidationError("output", "exactly one output declaration is supported");
        }
        spec.output = read_param(out[0], "output[0]", true);
    } else {
        spec.output = read_param(out, "output", true);
    }

    validate(spec);
    return spec;
}

std::string write_interface_spec(const InterfaceSpec& spec) {
    json doc;
    doc["command"] = spec.command;
    doc["parameters"] = json::array();
    for (const auto& p : spec.parameters) {
        json node;
        node["name"] = p.name;
        node["type"] = std::string(kind_name(p.kind));
        if (p.min) {
            node["min"] = *p.min;
        }
        if (p.max) {
            node["max"] = *p.max;
        }
        if (!p.values.empty()) {
            node["values"] = p.values;
        }
        doc["parameters"].push_back(node);
    }
    doc["output"] = json::array({json{{"name", spec.output.name}, {"type", std::string(kind_name(spec.output.kind))}}});
    return doc.dump(2) + "\n";
}

std::optional<Value> parse_value(std::string_view token, const ParamSpec& param) {
    switch (param.kind) {
    case ValueKind::Double: {
        auto v = parse_double_token(token);
        if (!v) {
            return std::nullopt;
        }
        return Value{*v};
    }
    case ValueKind::Integer: {
        if (!token.empty() && token.front() == '+') {
            token.remove_prefix(1);
        }
        std::int64_t v = 0;
        auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (token.empty() || ec != std::errc{} || end != token.data() + token.size()) {
            return std::nullopt;
        }
        return Value{v};
    }
    case ValueKind::Boolean: {
        std::string lower(token);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "true") {
            return Value{true};
        }
        if (lower == "false") {
            return Value{false};
        }
        return std::nullopt;
    }
    case ValueKind::String: {
        if (std::find(param.values.begin(), param.values.end(), token) == param.values.end()) {
            return std::nullopt;
        }
        return Value{std::string(token)};
    }
    }
    return std::nullopt;
}

std::vector<InputVector> parse_test_inputs(std::string_view text, const InterfaceSpec& spec) {
    std::vector<InputVector> inputs;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    while (offset < text.size()) {
        const std::size_t line_start = offset;
        std::size_t nl = text.find('\n', offset);
        std::string_view line = text.substr(offset, nl == std::string_view::npos ? std::string_view::npos : nl - offset);
        offset = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (is_blank(line)) {
            continue;
        }
        auto first = line.find_first_not_of(" \t");
        if (line[first] == '#') {
            continue;
        }

        auto tokens = split_ws(line);
        if (tokens.size() != spec.arity()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(spec.arity()) +
                                 " values, found " + std::to_string(tokens.size()),
                             line_start, line_no);
        }
        InputVector input;
        input.reserve(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto value = parse_value(tokens[i], spec.parameters[i]);
            if (!value) {
                throw ParseError("line " + std::to_string(line_no) + ": cannot read \"" + std::string(tokens[i]) +
                                     "\" as " + std::string(kind_name(spec.parameters[i].kind)) + " parameter \"" +
                                     spec.parameters[i].name + "\"",
                                 line_start, line_no);
            }
            input.push_back(std::move(*value));
        }
        inputs.push_back(std::move(input));
    }
    return inputs;
}

std::string write_test_inputs(const std::vector<InputVector>& inputs) {
    std::string out;
    for (const auto& input : inputs) {
        if (input.size() != inputs.front().size()) {
            throw std::invalid_argument("write_test_inputs: mixed arities in one suite");
        }
        out += format_input(input);
        out += '\n';
    }
    return out;
}

bool conforms(const InputVector& input, const InterfaceSpec& spec) noexcept {
    if (input.size() != spec.arity()) {
        return false;
    }
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& p = spec.parameters[i];
        if (kind_of(input[i]) != p.kind) {
            return false;
        }
        if (p.kind == ValueKind::String &&
            std::find(p.values.begin(), p.values.end(), std::get<std::string>(input[i])) == p.values.end()) {
            return false;
        }
    }
    return true;
}

bool within_bounds(const InputVector& input, const InterfaceSpec& spec) noexcept {
    if (!conforms(input, spec)) {
        return false;
    }
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& p = spec.parameters[i];
        if (p.kind == ValueKind::Double || p.kind == ValueKind::Integer) {
            double v = numeric_value(input[i]);
            if (!(v >= *p.min && v <= *p.max)) {
                return false;
            }
        }
    }
    return true;
}

std::vector<std::string> string_table(const InterfaceSpec& spec) {
    std::vector<std::string> table;
    for (const auto& p : spec.parameters) {
        if (p.kind != ValueKind::String) {
            continue;
        }
        for (const auto& v : p.values) {
            if (std::find(table.begin(), table.end(), v) == table.end()) {
                table.push_back(v);
            }
        }
    }
    return table;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace tbc
