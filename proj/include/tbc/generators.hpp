#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "tbc/spec_io.hpp"
#include "tbc/value.hpp"

namespace tbc {

struct ArtConfig {
    int candidate_set_size = 10;
    // rescale numeric coordinates by their declared range before measuring distance
    bool normalize = false;
};

enum class Strategy { Tbc, Random, Art };

std::string_view strategy_name(Strategy strategy) noexcept;
Strategy parse_strategy(std::string_view name);

/// Uniform draw: doubles on [min, max], integers on the inclusive range, fair booleans,
/// strings uniform over the enumeration.
InputVector sample_random_input(const InterfaceSpec& spec, Rng& rng);

/// Euclidean distance over parameters: numbers as reals, booleans as 0/1, strings 0 when equal
/// and 1 otherwise. With `normalize`, numeric differences are divided by (max - min).
double art_distance(const InputVector& a, const InputVector& b, const InterfaceSpec& spec, bool normalize = false);

/// Index of the candidate farthest (max over candidates of min distance to `executed`).
/// Empty `executed` selects candidate 0; ties go to the lowest index.
std::size_t art_select_index(std::span<const InputVector> executed, std::span<const InputVector> candidates,
                             const InterfaceSpec& spec, const ArtConfig& cfg = {});
InputVector art_select(std::span<const InputVector> executed, std::span<const InputVector> candidates,
                       const InterfaceSpec& spec, const ArtConfig& cfg = {});

/// Seed tests followed by random draws (or ART selections) up to `total_budget` inputs.
/// Throws std::invalid_argument when the budget is smaller than the seed set or the strategy is Tbc.
std::vector<InputVector> generate_suite(Strategy strategy, const InterfaceSpec& spec,
                                        const std::vector<InputVector>& seed_tests, std::size_t total_budget,
                                        const ArtConfig& cfg, Rng& rng);

} // namespace tbc
