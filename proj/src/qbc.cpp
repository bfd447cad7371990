#include "tbc/qbc.hpp"

#include <Eigen/Core>

#include "tbc/errors.hpp"
#include "tbc/generators.hpp"

namespace tbc {

void TbcConfig::validate() const {
    gp.validate();
    if (iterations < 0) {
        throw std::invalid_argument("iterations must be non-negative");
    }
    if (tests_per_iteration < 1) {
        throw std::invalid_argument("testsPerIteration must be positive");
    }
    if (random_pool_size < 1 || tests_per_iteration > random_pool_size) {
        throw std::invalid_argument("testsPerIteration must not exceed randomPoolSize");
    }
    if (committee_size < 1 || committee_size > gp.population_size) {
        throw std::invalid_argument("committeeSize must lie in [1, populationSize]");
    }
}

double mad(std::span<const double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("mad: empty list");
    }
    const Eigen::Map<const Eigen::ArrayXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
    return (x - x.mean()).abs().mean();
}

Committee make_committee(const Population& pop, int size) {
    if (pop.members.empty()) {
        throw std::invalid_argument("make_committee: empty population");
    }
    const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(size, 1)), 1, pop.members.size());
    Committee committee;
    committee.models.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        committee.models.push_back(pop.members[i].tree);
    }
    return committee;
}

UtilityScore utility(const Committee& committee, const InputVector& input, const InterfaceSpec& spec,
                     const TbcConfig& cfg) {
    if (committee.models.empty()) {
        throw std::invalid_argument("utility: empty committee");
    }
    std::vector<double> predictions;
    predictions.reserve(committee.models.size());
    for (const auto& model : committee.models) {
        const double p = sanitize(evaluate(model, input, spec, cfg.gp.eval).as_double(), cfg.substitution_value);
        if (!std::isfinite(p)) {
            note_nonfinite_violation();
        }
        predictions.push_back(p);
    }
    return {input, mad(predictions)};
}

std::vector<Selection> select_next_tests(const Committee& committee, std::vector<InputVector>& pool, int count,
                                         const Executor& executor, const InterfaceSpec& spec,
                                         const TbcConfig& cfg) {
    if (count < 0 || static_cast<std::size_t>(count) > pool.size()) {
        throw std::invalid_argument("select_next_tests: pool smaller than the number of tests requested");
    }
    // The committee is fixed for the whole call, so every score is computed once.
    std::vector<double> scores;
    scores.reserve(pool.size());
    for (const auto& candidate : pool) {
        scores.push_back(utility(committee, candidate, spec, cfg).mad);
    }
    std::vector<std::size_t> original(pool.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        original[i] = i;
    }

    std::vector<Selection> picked;
    picked.reserve(static_cast<std::size_t>(count));
    for (int round = 0; round < count; ++round) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            if (scores[i] > scores[best]) {
                best = i;
            }
        }
        Selection s;
        s.execution.input = pool[best];
        s.execution.observed = executor(pool[best]);
        s.mad = scores[best];
        s.pool_index = original[best];
        picked.push_back(std::move(s));

        const auto offset = static_cast<std::ptrdiff_t>(best);
        pool.erase(pool.begin() + offset);
        scores.erase(scores.begin() + offset);
        original.erase(original.begin() + offset);
    }
    return picked;
}

TbcResult run_tbc(const InterfaceSpec& spec, const std::vector<InputVector>& seed_tests, const TbcConfig& cfg,
                  const Executor& executor, Rng& rng, const IterationObserver& observer) {
    cfg.validate();
    if (seed_tests.empty()) {
        throw std::invalid_argument("run_tbc: the seed test set is empty");
    }
    GpConfig gp = cfg.gp;
    gp.substitution_value = cfg.substitution_value;

    TbcResult result;
    for (const auto& input : seed_tests) {
        try {
            result.executions.push_back({input, executor(input)});
        } catch (const ExecutionError& e) {
            throw CampaignError(std::string("seed test failed: ") + e.what(), result, input);
        }
    }

    Population previous;
    for (int it = 1; it <= cfg.iterations; ++it) {
        Population pop = infer(result.executions, gp, spec, rng, {},
                               cfg.warm_start && !previous.members.empty() ? &previous : nullptr);
        const Committee committee = make_committee(pop, cfg.committee_size);

        std::vector<InputVector> pool;
        pool.reserve(static_cast<std::size_t>(cfg.random_pool_size));
        for (int k = 0; k < cfg.random_pool_size; ++k) {
            pool.push_back(sample_random_input(spec, rng));
        }

        IterationRecord record;
        record.iteration = it;
        record.best_fitness_error = pop.best().error;
        record.generations = pop.generation;
        record.committee_size = committee.models.size();
        for (const auto& model : committee.models) {
            record.committee_models.push_back(render(model, spec));
        }

        // Executions happen inside select_next_tests; wrap the executor so a failure still
        // reports the labeled tests of this iteration.
        std::vector<Selection> done;
        Executor tracking = [&](const InputVector& input) {
            try {
                return executor(input);
            } catch (const ExecutionError& e) {
                TbcResult partial = result;
                for (const auto& d : done) {
                    partial.executions.push_back(d.execution);
                }
                throw CampaignError("iteration " + std::to_string(it) + ": " + e.what(), std::move(partial), input);
            }
        };
        Executor recording = [&](const InputVector& input) {
            const double out = tracking(input);
            done.push_back({{input, out}, 0.0, 0});
            return out;
        };
        record.selected = select_next_tests(committee, pool, cfg.tests_per_iteration, recording, spec, cfg);
        for (const auto& s : record.selected) {
            result.executions.push_back(s.execution);
        }
        result.iterations.push_back(record);
        if (observer) {
            observer(result.iterations.back(), result.executions);
        }
        if (cfg.warm_start) {
            previous = std::move(pop);
        }
    }
    return result;
}

} // namespace tbc
