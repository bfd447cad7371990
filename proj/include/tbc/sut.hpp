#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tbc/spec_io.hpp"
#include "tbc/value.hpp"

namespace tbc {

using FixtureFunction = std::function<double(const InputVector&)>;

/// A seeded fault: a small documented semantic change of a fixture. `witness` is an input
/// on which it provably differs from the original.
struct Mutant {
    std::string name;
    std::string description;
    FixtureFunction function;
    InputVector witness;
};

struct Fixture {
    std::string id;
    std::string description;
    std::vector<ParamSpec> parameters;
    ParamSpec output;
    FixtureFunction reference;
    std::vector<Mutant> mutants;
    std::vector<InputVector> seed_tests;

    /// Interface with command `builtin:<id>`.
    InterfaceSpec interface() const;
};

/// Built-in subjects: bmi, piecewise, poly3, binom_small.
const std::vector<Fixture>& catalog();

/// Throws ValidationError (field "fixture") for unknown ids.
const Fixture& find_fixture(std::string_view id);

inline constexpr std::string_view kBuiltinPrefix = "builtin:";

struct ExternalSut {
    /// Program and leading arguments; one argument per parameter is appended at execution.
    std::vector<std::string> argv;
    std::chrono::milliseconds timeout{5000};
};

struct BuiltinSut {
    std::string id;
    // nullopt runs the original; otherwise the mutant with this index
    std::optional<std::size_t> mutant;
};

using SutHandle = std::variant<ExternalSut, BuiltinSut>;

/// Runs the system under test once. External runs throw ExecutionError carrying the command
/// line and captured output on non-zero exit, timeout, or output that is not exactly one
/// numeric token (`inf`, `-inf` and `nan` are accepted).
double execute(const SutHandle& handle, const InputVector& input);

/// Reads the single numeric token a system under test prints; nullopt when malformed.
std::optional<double> parse_sut_output(std::string_view text);

/// Resolves an interface command into a handle. `builtin:<id>` maps to a fixture; otherwise the
/// command is split on whitespace and a relative program found in `base_dir` is preferred over
/// a PATH lookup.
SutHandle handle_for(const InterfaceSpec& spec, const std::string& base_dir = ".",
                     std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

} // namespace tbc
