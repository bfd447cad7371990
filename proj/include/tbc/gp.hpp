#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tbc/expr.hpp"
#include "tbc/sanitize.hpp"
#include "tbc/spec_io.hpp"
#include "tbc/value.hpp"

namespace tbc {

/// One labeled data point: an input and the output the system under test produced for it.
struct Execution {
    InputVector input;
    double observed = 0.0;

    bool operator==(const Execution&) const = default;
};

struct GpConfig {
    int population_size = 800;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    int max_depth = 10;
    int tournament_size = 6;
    int max_generations = 50;
    int stagnation_window = 15;
    double substitution_value = kDefaultSubstitution;
    EvalOptions eval{};

    /// Throws std::invalid_argument on the first violated constraint.
    void validate() const;
};

struct ScoredIndividual {
    ExprTree tree;
    double error = 0.0;
};

/// Members sorted ascending by error, ties by tree size; rank 0 is the fittest.
struct Population {
    std::vector<ScoredIndividual> members;
    int generation = 0;

    const ScoredIndividual& best() const { return members.front(); }
};

/// Training data pre-encoded for batch evaluation, observations already sanitized.
class TrainingSet {
public:
    TrainingSet(std::span<const Execution> train, const InterfaceSpec& spec,
                double substitution_value = kDefaultSubstitution);

    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
    const Eigen::ArrayXd& targets() const noexcept { return targets_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(targets_.size()); }
    double substitution_value() const noexcept { return substitution_; }

private:
    Eigen::MatrixXd inputs_;
    Eigen::ArrayXd targets_;
    double substitution_;
};

/// Mean absolute error between sanitized predictions and sanitized observations.
/// Throws std::invalid_argument for an empty training set.
double fitness(const ExprTree& tree, std::span<const Execution> train, const InterfaceSpec& spec,
               double substitution_value = kDefaultSubstitution, const EvalOptions& options = {});
double fitness(const ExprTree& tree, const TrainingSet& train, const EvalOptions& options = {});

/// Stable sort by (error, size).
void sort_population(Population& pop);

/// Ramped half-and-half initial population (depths 2..max_depth, alternating full and grow),
/// scored and sorted.
Population initial_population(const TrainingSet& train, const GpConfig& cfg, const PrimitiveSet& primitives,
                              Rng& rng);

/// Index into `pop.members` of a tournament winner; entrants are sampled without replacement.
std::size_t tournament_select(const Population& pop, int tournament_size, Rng& rng);

/// Subtree crossover at a uniformly chosen type-compatible node pair. Returns nullopt when
/// five attempts all exceed `max_depth`.
std::optional<ExprTree> crossover(const ExprTree& receiver, const ExprTree& donor, int max_depth, Rng& rng);

/// Node mutation: a terminal changes its value (free constants are resampled, other terminals
/// replaced by a random terminal of the same kind); a non-terminal's subtree is regrown.
ExprTree mutate(const ExprTree& tree, int max_depth, const PrimitiveSet& primitives, Rng& rng);

/// One elitist generation: rank 0 survives unchanged, the rest are bred from tournaments.
Population evolve_generation(const Population& pop, const TrainingSet& train, const GpConfig& cfg,
                             const PrimitiveSet& primitives, Rng& rng);
Population evolve_generation(const Population& pop, std::span<const Execution> train, const GpConfig& cfg,
                             const InterfaceSpec& spec, Rng& rng);

using GenerationObserver = std::function<void(const Population&)>;

/// Evolves until the best error is zero, stagnates for `stagnation_window` generations, or
/// `max_generations` is reached. The observer sees generation 0 and every later generation.
/// When `seed_population` is given its trees are re-scored and used instead of a random start.
Population infer(std::span<const Execution> train, const GpConfig& cfg, const InterfaceSpec& spec, Rng& rng,
                 const GenerationObserver& observer = {}, const Population* seed_population = nullptr);

/// Member with minimal error on `train`; ties by smaller size, then earlier index.
const ScoredIndividual& pick_best(const Population& pop);
ScoredIndividual pick_best(const Population& pop, std::span<const Execution> train, const InterfaceSpec& spec,
                           double substitution_value = kDefaultSubstitution);

} // namespace tbc
