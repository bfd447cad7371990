#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tbc/generators.hpp"
#include "tbc/gp.hpp"

using namespace tbc;
using tbc::test::bmi_spec;
using tbc::test::mixed_spec;

namespace {

std::vector<Execution> bmi_train(std::size_t count = 4) {
    const double hw[6][2] = {{1.7, 50}, {1.8, 70}, {1.9, 100}, {1.7, 110}, {0.0, 5}, {5.0, 0}};
    std::vector<Execution> train;
    for (std::size_t k = 0; k < count; ++k) {
        train.push_back({{Value{hw[k][0]}, Value{hw[k][1]}}, hw[k][1] / (hw[k][0] * hw[k][0])});
    }
    return train;
}

// straightforward re-implementation: scalar evaluation, sanitize, absolute difference, mean
double oracle_fitness(const ExprTree& tree, const std::vector<Execution>& train, const InterfaceSpec& spec) {
    double sum = 0.0;
    for (const auto& e : train) {
        double p = evaluate(tree, e.input, spec).as_double();
        double o = e.observed;
        p = std::isfinite(p) ? p : 1e7;
        o = std::isfinite(o) ? o : 1e7;
        sum += std::fabs(p - o);
    }
    return sum / static_cast<double>(train.size());
}

GpConfig small_config(int population = 60, int generations = 20) {
    GpConfig cfg;
    cfg.population_size = population;
    cfg.max_generations = generations;
    return cfg;
}

} // namespace

TEST_CASE("fitness examples") {
    const auto spec = bmi_spec();
    const auto train = bmi_train();
    const auto zero = parse_expr("0.0", spec);
    const double expected = (50 / 2.89 + 70 / 3.24 + 100 / 3.61 + 110 / 2.89) / 4.0;
    CHECK(fitness(zero, train, spec) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(fitness(zero, train, spec) == doctest::Approx(26.167).epsilon(1e-4));

    const auto exact = parse_expr("Div(weight,Mult(height,height))", spec);
    CHECK(fitness(exact, train, spec) == 0.0);

    const auto inf = parse_expr("Div(1.0,0.0)", spec);
    const std::vector<Execution> one{{{Value{1.0}, Value{1.0}}, 5.0}};
    CHECK(fitness(inf, one, spec) == 9'999'995.0);
    // non-finite observation against non-finite prediction costs nothing
    const std::vector<Execution> inf_obs{{{Value{0.0}, Value{5.0}}, std::numeric_limits<double>::infinity()}};
    CHECK(fitness(inf, inf_obs, spec) == 0.0);
    CHECK_THROWS_AS(fitness(zero, std::vector<Execution>{}, spec), std::invalid_argument);
}

TEST_CASE("property: fitness matches a brute-force oracle and ignores order") {
    Rng rng(41);
    for (const auto& spec : {bmi_spec(), mixed_spec()}) {
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<Execution> train;
            const int n = 1 + trial % 12;
            for (int k = 0; k < n; ++k) {
                double obs = std::uniform_real_distribution<double>(-50, 50)(rng);
                if (k % 7 == 3) {
                    obs = std::numeric_limits<double>::quiet_NaN();
                }
                train.push_back({sample_random_input(spec, rng), obs});
            }
            const auto tree = random_tree(ValueKind::Double, 2 + trial % 6, spec, rng);
            const double got = fitness(tree, train, spec);
            const double want = oracle_fitness(tree, train, spec);
            CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
            std::shuffle(train.begin(), train.end(), rng);
            CHECK(std::fabs(fitness(tree, train, spec) - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
        }
    }
}

TEST_CASE("elitism floor: clones of a perfect tree stay perfect") {
    const auto spec = bmi_spec();
    const auto train = bmi_train();
    const auto exact = parse_expr("Div(weight,Pow(height,2.0))", spec);
    Population pop;
    for (int k = 0; k < 30; ++k) {
        pop.members.push_back({exact, fitness(exact, train, spec)});
    }
    Rng rng(1);
    for (int g = 0; g < 10; ++g) {
        pop = evolve_generation(pop, train, small_config(30), spec, rng);
        CHECK(pop.best().error == 0.0);
        CHECK(pop.members.size() == 30);
    }
}

TEST_CASE("property: 1,000 generations keep every member well typed and within depth") {
    const auto spec = mixed_spec();
    Rng rng(43);
    std::vector<Execution> train;
    for (int k = 0; k < 10; ++k) {
        train.push_back({sample_random_input(spec, rng), std::uniform_real_distribution<double>(-3, 3)(rng)});
    }
    auto cfg = small_config(24);
    cfg.max_depth = 6;
    const TrainingSet ts(train, spec);
    const PrimitiveSet prims(spec);
    Population pop = initial_population(ts, cfg, prims, rng);
    int violations = 0;
    for (int g = 0; g < 1000; ++g) {
        const double before = pop.best().error;
        pop = evolve_generation(pop, ts, cfg, prims, rng);
        if (pop.best().error > before) {
            ++violations;
        }
        if (pop.members.size() != 24) {
            ++violations;
        }
        for (const auto& m : pop.members) {
            if (!is_well_typed(m.tree, spec, cfg.max_depth) || m.tree.kind() != ValueKind::Double) {
                ++violations;
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("evolve_generation is deterministic") {
    const auto spec = bmi_spec();
    const auto train = bmi_train(6);
    Rng a(77);
    Rng b(77);
    const auto pa = evolve_generation(infer(train, small_config(40, 0), spec, a), train, small_config(40), spec, a);
    const auto pb = evolve_generation(infer(train, small_config(40, 0), spec, b), train, small_config(40), spec, b);
    REQUIRE(pa.members.size() == pb.members.size());
    for (std::size_t k = 0; k < pa.members.size(); ++k) {
        CHECK(pa.members[k].tree == pb.members[k].tree);
        CHECK(pa.members[k].error == pb.members[k].error);
    }
}

TEST_CASE("infer finds a constant target in the terminal set") {
    const auto spec = bmi_spec();
    Rng rng(5);
    std::vector<Execution> train;
    for (int k = 0; k < 10; ++k) {
        train.push_back({sample_random_input(spec, rng), -1.0});
    }
    const auto pop = infer(train, small_config(100, 20), spec, rng);
    CHECK(pop.best().error == 0.0);
    CHECK(pop.generation <= 3);
}

TEST_CASE("infer recovers y = x on most seeds") {
    const auto spec = parse_interface_spec(R"({"command": "id",
        "parameters": [{"name": "x", "type": "double", "min": -10, "max": 10}],
        "output": [{"name": "y", "type": "double"}]})");
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        std::vector<Execution> train;
        for (int k = 0; k < 30; ++k) {
            const auto in = sample_random_input(spec, rng);
            train.push_back({in, std::get<double>(in[0])});
        }
        if (infer(train, small_config(200, 50), spec, rng).best().error < 1e-6) {
            ++solved;
        }
    }
    CHECK(solved >= 8);
}

TEST_CASE("observer sees a non-increasing best error") {
    const auto spec = bmi_spec();
    const auto train = bmi_train(6);
    Rng rng(8);
    std::vector<double> best;
    const auto pop = infer(train, small_config(100, 30), spec, rng,
                           [&](const Population& p) { best.push_back(p.best().error); });
    REQUIRE(!best.empty());
    CHECK(static_cast<int>(best.size()) == pop.generation + 1);
    CHECK(std::is_sorted(best.rbegin(), best.rend()));
}

TEST_CASE("pick_best tie-breaks") {
    const auto spec = bmi_spec();
    const auto train = bmi_train();
    Population pop;
    const auto big = parse_expr("Add(Add(0.5,0.5),Add(0.5,0.5))", spec);  // 7 nodes, value 2
    const auto small = parse_expr("Add(1.5,0.5)", spec);                 // 3 nodes, value 2
    pop.members = {{big, fitness(big, train, spec)}, {small, fitness(small, train, spec)}};
    CHECK(pick_best(pop).tree == small);
    CHECK(pick_best(pop, train, spec).tree == small);

    Population single;
    single.members = {{big, 1.0}};
    CHECK(pick_best(single).tree == big);

    const auto exact = parse_expr("Div(weight,Mult(height,height))", spec);
    pop.members.push_back({exact, fitness(exact, train, spec)});
    CHECK(pick_best(pop, train, spec).tree == exact);
    CHECK_THROWS(pick_best(Population{}));
}

TEST_CASE("tournament winner is the best-ranked entrant") {
    const auto spec = bmi_spec();
    const auto train = bmi_train();
    Rng rng(2);
    const auto pop = infer(train, small_config(50, 0), spec, rng);
    // a tournament over the whole population must return rank 0
    for (int k = 0; k < 20; ++k) {
        CHECK(tournament_select(pop, 50, rng) == 0);
    }
}

TEST_CASE("config validation") {
    GpConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.population_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = GpConfig{};
    cfg.crossover_rate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
