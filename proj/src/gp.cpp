#include "tbc/gp.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>

namespace tbc {
namespace {

std::atomic<std::uint64_t> g_nonfinite_violations{0};

// Height of the subtree rooted at every node (terminal = 1).
std::vector<int> subtree_heights(const ExprTree& tree) {
    std::vector<int> heights(tree.size());
    std::vector<int> stack;
    for (std::size_t k = tree.size(); k-- > 0;) {
        int h = 1;
        for (int a = arity(tree[k].op); a > 0; --a) {
            h = std::max(h, stack.back() + 1);
            stack.pop_back();
        }
        heights[k] = h;
        stack.push_back(h);
    }
    return heights;
}

std::array<std::vector<std::size_t>, kKindCount> nodes_by_kind(const ExprTree& tree) {
    std::array<std::vector<std::size_t>, kKindCount> out;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        out[static_cast<std::size_t>(tree[i].kind)].push_back(i);
    }
    return out;
}

bool ranks_before(const ScoredIndividual& a, const ScoredIndividual& b) {
    if (a.error != b.error) {
        return a.error < b.error;
    }
    return a.tree.size() < b.tree.size();
}

ValueKind root_kind(const PrimitiveSet& primitives) { return primitives.spec().output.kind; }

} // namespace

std::uint64_t nonfinite_violations() noexcept { return g_nonfinite_violations.load(); }
void note_nonfinite_violation() noexcept { g_nonfinite_violations.fetch_add(1); }
void reset_nonfinite_violations() noexcept { g_nonfinite_violations.store(0); }

void GpConfig::validate() const {
    if (population_size < 1) {
        throw std::invalid_argument("populationSize must be positive");
    }
    if (crossover_rate < 0.0 || mutation_rate < 0.0 || crossover_rate + mutation_rate > 1.0) {
        throw std::invalid_argument("crossoverRate and mutationRate must be probabilities summing to at most 1");
    }
    if (max_depth < 1) {
        throw std::invalid_argument("maxDepth must be positive");
    }
    if (tournament_size < 1 || tournament_size > population_size) {
        throw std::invalid_argument("tournamentSize must lie in [1, populationSize]");
    }
    if (max_generations < 0) {
        throw std::invalid_argument("maxGenerations must be non-negative");
    }
    if (stagnation_window < 1) {
        throw std::invalid_argument("stagnationWindow must be positive");
    }
}

TrainingSet::TrainingSet(std::span<const Execution> train, const InterfaceSpec& spec, double substitution_value)
    : substitution_(substitution_value) {
    if (train.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    std::vector<InputVector> inputs;
    inputs.reserve(train.size());
    targets_.resize(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
        inputs.push_back(train[i].input);
        targets_(static_cast<Eigen::Index>(i)) = sanitize(train[i].observed, substitution_value);
    }
    inputs_ = encode_inputs(inputs, spec);
}

double fitness(const ExprTree& tree, const TrainingSet& train, const EvalOptions& options) {
    const double sub = train.substitution_value();
    const Eigen::ArrayXd predictions =
        evaluate_batch(tree, train.inputs(), options).unaryExpr([sub](double v) { return sanitize(v, sub); });
    if (!predictions.allFinite() || !train.targets().allFinite()) {
        note_nonfinite_violation();
    }
    return (predictions - train.targets()).abs().mean();
}

double fitness(const ExprTree& tree, std::span<const Execution> train, const InterfaceSpec& spec,
               double substitution_value, const EvalOptions& options) {
    return fitness(tree, TrainingSet(train, spec, substitution_value), options);
}

void sort_population(Population& pop) {
    std::stable_sort(pop.members.begin(), pop.members.end(), ranks_before);
}

Population initial_population(const TrainingSet& train, const GpConfig& cfg, const PrimitiveSet& primitives,
                              Rng& rng) {
    Population pop;
    pop.members.reserve(static_cast<std::size_t>(cfg.population_size));
    const int ramp = std::max(1, cfg.max_depth - 1);
    for (int k = 0; k < cfg.population_size; ++k) {
        const int d = cfg.max_depth < 2 ? 1 : 2 + (k / 2) % ramp;
        const auto method = k % 2 == 0 ? GrowMethod::Full : GrowMethod::Grow;
        pop.members.push_back({random_tree(root_kind(primitives), d, primitives, rng, method), 0.0});
    }
    for (auto& m : pop.members) {
        m.error = fitness(m.tree, train, cfg.eval);
    }
    sort_population(pop);
    return pop;
}

std::size_t tournament_select(const Population& pop, int tournament_size, Rng& rng) {
    const std::size_t n = pop.members.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(tournament_size), n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> entrants;
    entrants.reserve(k);
    while (entrants.size() < k) {
        const std::size_t i = pick(rng);
        if (std::find(entrants.begin(), entrants.end(), i) == entrants.end()) {
            entrants.push_back(i);
        }
    }
    // members are kept sorted, so the lowest index is the fittest entrant
    return *std::min_element(entrants.begin(), entrants.end());
}

std::optional<ExprTree> crossover(const ExprTree& receiver, const ExprTree& donor, int max_depth, Rng& rng) {
    const auto r = nodes_by_kind(receiver);
    const auto d = nodes_by_kind(donor);
    std::size_t total = 0;
    for (int k = 0; k < kKindCount; ++k) {
        total += r[k].size() * d[k].size();
    }
    if (total == 0) {
        return std::nullopt;
    }
    const auto depths = node_depths(receiver);
    const auto heights = subtree_heights(donor);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (int attempt = 0; attempt < 5; ++attempt) {
        std::size_t t = pick(rng);
        int k = 0;
        while (t >= r[k].size() * d[k].size()) {
            t -= r[k].size() * d[k].size();
            ++k;
        }
        const std::size_t at = r[k][t / d[k].size()];
        const std::size_t from = d[k][t % d[k].size()];
        if (depths[at] - 1 + heights[from] <= max_depth) {
            return replace_subtree(receiver, at, donor, from);
        }
    }
    return std::nullopt;
}

ExprTree mutate(const ExprTree& tree, int max_depth, const PrimitiveSet& primitives, Rng& rng) {
    const std::size_t at = std::uniform_int_distribution<std::size_t>(0, tree.size() - 1)(rng);
    const Node& target = tree[at];
    if (is_terminal(target.op)) {
        Node replacement = target;
        if (target.op == Op::Constant && target.ephemeral) {
            replacement.value = sample_free_constant(target.kind, rng);
        } else {
            replacement = random_terminal(target.kind, primitives, rng);
        }
        return replace_subtree(tree, at, ExprTree({replacement}), 0);
    }
    const int node_depth = node_depths(tree)[at];
    const int budget = std::max(1, max_depth - node_depth + 1);
    const ExprTree fresh = random_tree(target.kind, budget, primitives, rng, GrowMethod::Grow);
    return replace_subtree(tree, at, fresh, 0);
}

Population evolve_generation(const Population& pop, const TrainingSet& train, const GpConfig& cfg,
                             const PrimitiveSet& primitives, Rng& rng) {
    if (pop.members.empty()) {
        throw std::invalid_argument("evolve_generation: empty population");
    }
    const std::size_t n = static_cast<std::size_t>(cfg.population_size);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    struct Offspring {
        ExprTree tree;
        std::optional<double> known_error;
    };
    std::vector<Offspring> offspring;
    offspring.reserve(n);
    while (offspring.size() + 1 < n) {
        const auto& parent = pop.members[tournament_select(pop, cfg.tournament_size, rng)];
        const double r = coin(rng);
        if (r < cfg.crossover_rate) {
            const auto& other = pop.members[tournament_select(pop, cfg.tournament_size, rng)];
            if (auto child = crossover(parent.tree, other.tree, cfg.max_depth, rng)) {
                offspring.push_back({std::move(*child), std::nullopt});
            } else {
                offspring.push_back({parent.tree, parent.error});
            }
        } else if (r < cfg.crossover_rate + cfg.mutation_rate) {
            offspring.push_back({mutate(parent.tree, cfg.max_depth, primitives, rng), std::nullopt});
        } else {
            offspring.push_back({parent.tree, parent.error});
        }
    }

    Population next;
    next.generation = pop.generation + 1;
    next.members.reserve(n);
    next.members.push_back(pop.members.front());
    for (auto& o : offspring) {
        const double error = o.known_error ? *o.known_error : fitness(o.tree, train, cfg.eval);
        next.members.push_back({std::move(o.tree), error});
    }
    sort_population(next);
    return next;
}

Population evolve_generation(const Population& pop, std::span<const Execution> train, const GpConfig& cfg,
                             const InterfaceSpec& spec, Rng& rng) {
    return evolve_generation(pop, TrainingSet(train, spec, cfg.substitution_value), cfg, PrimitiveSet(spec), rng);
}

Population infer(std::span<const Execution> train, const GpConfig& cfg, const InterfaceSpec& spec, Rng& rng,
                 const GenerationObserver& observer, const Population* seed_population) {
    cfg.validate();
    const TrainingSet data(train, spec, cfg.substitution_value);
    const PrimitiveSet primitives(spec);

    Population pop;
    if (seed_population != nullptr && !seed_population->members.empty()) {
        for (const auto& m : seed_population->members) {
            if (pop.members.size() == static_cast<std::size_t>(cfg.population_size)) {
                break;
            }
            pop.members.push_back({m.tree, fitness(m.tree, data, cfg.eval)});
        }
        while (pop.members.size() < static_cast<std::size_t>(cfg.population_size)) {
            auto tree = random_tree(spec.output.kind, cfg.max_depth, primitives, rng, GrowMethod::Grow);
            const double error = fitness(tree, data, cfg.eval);
            pop.members.push_back({std::move(tree), error});
        }
        sort_population(pop);
    } else {
        pop = initial_population(data, cfg, primitives, rng);
    }
    if (observer) {
        observer(pop);
    }

    double best = pop.best().error;
    int stagnant = 0;
    while (pop.generation < cfg.max_generations && best > 0.0 && stagnant < cfg.stagnation_window) {
        pop = evolve_generation(pop, data, cfg, primitives, rng);
        if (observer) {
            observer(pop);
        }
        if (pop.best().error < best) {
            best = pop.best().error;
            stagnant = 0;
        } else {
            ++stagnant;
        }
    }
    return pop;
}

const ScoredIndividual& pick_best(const Population& pop) {
    if (pop.members.empty()) {
        throw std::invalid_argument("pick_best: empty population");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.members.size(); ++i) {
        if (ranks_before(pop.members[i], pop.members[best])) {
            best = i;
        }
    }
    return pop.members[best];
}

ScoredIndividual pick_best(const Population& pop, std::span<const Execution> train, const InterfaceSpec& spec,
                           double substitution_value) {
    if (pop.members.empty()) {
        throw std::invalid_argument("pick_best: empty population");
    }
    const TrainingSet data(train, spec, substitution_value);
    Population rescored;
    for (const auto& m : pop.members) {
        rescored.members.push_back({m.tree, fitness(m.tree, data)});
    }
    return pick_best(rescored);
}

} // namespace tbc
