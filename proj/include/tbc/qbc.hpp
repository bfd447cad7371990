#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tbc/expr.hpp"
#include "tbc/gp.hpp"
#include "tbc/sanitize.hpp"
#include "tbc/spec_io.hpp"

namespace tbc {

struct TbcConfig {
    int iterations = 60;
    int tests_per_iteration = 5;
    int random_pool_size = 1000;
    int committee_size = 10;
    GpConfig gp{};
    double substitution_value = kDefaultSubstitution;
    // seed each iteration's GP with the previous iteration's final population
    bool warm_start = false;

    void validate() const;
};

/// The fittest models of one population, in rank order.
struct Committee {
    std::vector<ExprTree> models;
};

struct UtilityScore {
    InputVector input;
    double mad = 0.0;
};

/// A test picked from the candidate pool, labeled by the system under test.
struct Selection {
    Execution execution;
    double mad = 0.0;
    std::size_t pool_index = 0;
};

/// Runs the system under test on one input. Implementations throw ExecutionError on failure.
using Executor = std::function<double(const InputVector&)>;

/// Mean absolute deviation (1/n) * sum |x_i - mean(x)|. Inputs must be finite.
/// Throws std::invalid_argument for an empty list.
double mad(std::span<const double> xs);

/// Top `size` members of `pop` (at least one, at most the population).
Committee make_committee(const Population& pop, int size);

/// Disagreement of the committee at `input`: MAD over the sanitized model predictions.
UtilityScore utility(const Committee& committee, const InputVector& input, const InterfaceSpec& spec,
                     const TbcConfig& cfg);

/// Picks `count` inputs of maximal MAD from `pool` one after another (ties: lowest pool index),
/// executing each and removing it from `pool`. Returned in selection order; `pool_index` is the
/// position in the pool as passed in.
std::vector<Selection> select_next_tests(const Committee& committee, std::vector<InputVector>& pool, int count,
                                         const Executor& executor, const InterfaceSpec& spec,
                                         const TbcConfig& cfg);

/// Per-iteration trace of a campaign.
struct IterationRecord {
    int iteration = 0;
    double best_fitness_error = 0.0;
    int generations = 0;
    std::size_t committee_size = 0;
    std::vector<Selection> selected;
    std::vector<std::string> committee_models;
};

struct TbcResult {
    std::vector<Execution> executions;
    std::vector<IterationRecord> iterations;
};

/// Thrown when the system under test fails mid-campaign; carries everything gathered so far.
class CampaignError : public std::runtime_error {
public:
    CampaignError(const std::string& what, TbcResult partial, InputVector offending)
        : std::runtime_error(what), partial_(std::move(partial)), offending_(std::move(offending)) {}

    const TbcResult& partial() const noexcept { return partial_; }
    const InputVector& offending_input() const noexcept { return offending_; }

private:
    TbcResult partial_;
    InputVector offending_;
};

using IterationObserver = std::function<void(const IterationRecord&, const std::vector<Execution>&)>;

/// Testing by committee: label the seed tests, then for each iteration infer a population from
/// every execution so far, form the committee, draw a fresh random pool and add the
/// `tests_per_iteration` most disputed inputs. Returns |seed| + iterations * s executions,
/// seed labels first.
TbcResult run_tbc(const InterfaceSpec& spec, const std::vector<InputVector>& seed_tests, const TbcConfig& cfg,
                  const Executor& executor, Rng& rng, const IterationObserver& observer = {});

} // namespace tbc
