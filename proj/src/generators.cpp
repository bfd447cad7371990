#include "tbc/generators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tbc {

std::string_view strategy_name(Strategy strategy) noexcept {
    switch (strategy) {
    case Strategy::Tbc: return "tbc";
    case Strategy::Random: return "random";
    case Strategy::Art: return "art";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "tbc") {
        return Strategy::Tbc;
    }
    if (name == "random") {
        return Strategy::Random;
    }
    if (name == "art") {
        return Strategy::Art;
    }
    throw std::invalid_argument("unknown strategy \"" + std::string(name) + "\"");
}

InputVector sample_random_input(const InterfaceSpec& spec, Rng& rng) {
    InputVector input;
    input.reserve(spec.arity());
    for (const auto& p : spec.parameters) {
        switch (p.kind) {
        case ValueKind::Double: {
            const double lo = *p.min;
            const double hi = *p.max;
            input.emplace_back(lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng));
            break;
        }
        case ValueKind::Integer: {
            const auto lo = static_cast<std::int64_t>(*p.min);
            const auto hi = static_cast<std::int64_t>(*p.max);
            input.emplace_back(std::uniform_int_distribution<std::int64_t>(lo, hi)(rng));
            break;
        }
        case ValueKind::Boolean: input.emplace_back(std::bernoulli_distribution(0.5)(rng)); break;
        case ValueKind::String: {
            const auto i = std::uniform_int_distribution<std::size_t>(0, p.values.size() - 1)(rng);
            input.emplace_back(p.values[i]);
            break;
        }
        }
    }
    return input;
}

double art_distance(const InputVector& a, const InputVector& b, const InterfaceSpec& spec, bool normalize) {
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.arity(); ++i) {
        const auto& p = spec.parameters[i];
        double diff = 0.0;
        if (p.kind == ValueKind::String) {
            diff = std::get<std::string>(a[i]) == std::get<std::string>(b[i]) ? 0.0 : 1.0;
        } else {
            diff = numeric_value(a[i]) - numeric_value(b[i]);
            if (normalize && p.min && p.max && *p.max > *p.min) {
                diff /= *p.max - *p.min;
            }
        }
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

std::size_t art_select_index(std::span<const InputVector> executed, std::span<const InputVector> candidates,
                             const InterfaceSpec& spec, const ArtConfig& cfg) {
    if (candidates.empty()) {
        throw std::invalid_argument("art_select: no candidates");
    }
    if (executed.empty()) {
        return 0;
    }
    std::size_t best = 0;
    double best_distance = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& e : executed) {
            nearest = std::min(nearest, art_distance(candidates[c], e, spec, cfg.normalize));
        }
        if (nearest > best_distance) {
            best_distance = nearest;
            best = c;
        }
    }
    return best;
}

InputVector art_select(std::span<const InputVector> executed, std::span<const InputVector> candidates,
                       const InterfaceSpec& spec, const ArtConfig& cfg) {
    return candidates[art_select_index(executed, candidates, spec, cfg)];
}

std::vector<InputVector> generate_suite(Strategy strategy, const InterfaceSpec& spec,
                                        const std::vector<InputVector>& seed_tests, std::size_t total_budget,
                                        const ArtConfig& cfg, Rng& rng) {
    if (total_budget < seed_tests.size()) {
        throw std::invalid_argument("generate_suite: budget smaller than the seed test set");
    }
    if (cfg.candidate_set_size < 1) {
        throw std::invalid_argument("generate_suite: candidateSetSize must be positive");
    }
    std::vector<InputVector> suite = seed_tests;
    suite.reserve(total_budget);
    switch (strategy) {
    case Strategy::Random:
        while (suite.size() < total_budget) {
            suite.push_back(sample_random_input(spec, rng));
        }
        break;
    case Strategy::Art: {
        std::vector<InputVector> candidates;
        while (suite.size() < total_budget) {
            candidates.clear();
            for (int k = 0; k < cfg.candidate_set_size; ++k) {
                candidates.push_back(sample_random_input(spec, rng));
            }
            suite.push_back(candidates[art_select_index(suite, candidates, spec, cfg)]);
        }
        break;
    }
    case Strategy::Tbc: throw std::invalid_argument("generate_suite: TBC suites come from run_tbc");
    }
    return suite;
}

} // namespace tbc
