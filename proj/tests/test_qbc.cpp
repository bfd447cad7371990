#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "support.hpp"
#include "tbc/errors.hpp"
#include "tbc/generators.hpp"
#include "tbc/qbc.hpp"
#include "tbc/sut.hpp"

using namespace tbc;
using tbc::test::bmi_spec;

namespace {

InputVector bmi_at(double h, double w) { return {Value{h}, Value{w}}; }

double oracle_mad(const std::vector<double>& xs) {
    long double mean = 0;
    for (double x : xs) {
        mean += x;
    }
    mean /= xs.size();
    long double dev = 0;
    for (double x : xs) {
        dev += std::fabs(x - mean);
    }
    return static_cast<double>(dev / xs.size());
}

Committee paper_committee(const InterfaceSpec& spec) {
    return Committee{{parse_expr("Mult(weight,Exp(-1.1518922634307343))", spec),
                      parse_expr("Div(height,Exp(Sub(height,Log(weight))))", spec)}};
}

TbcConfig small_tbc(int iterations, int per_iteration, int pool) {
    TbcConfig cfg;
    cfg.iterations = iterations;
    cfg.tests_per_iteration = per_iteration;
    cfg.random_pool_size = pool;
    cfg.committee_size = 5;
    cfg.gp.population_size = 40;
    cfg.gp.max_generations = 5;
    return cfg;
}

double bmi(const InputVector& in) {
    const double h = std::get<double>(in[0]);
    return std::get<double>(in[1]) / (h * h);
}

} // namespace

TEST_CASE("sanitize") {
    CHECK(sanitize(5.2) == 5.2);
    CHECK(sanitize(std::numeric_limits<double>::infinity()) == 10'000'000.0);
    CHECK(sanitize(-std::numeric_limits<double>::infinity()) == 10'000'000.0);
    CHECK(sanitize(std::numeric_limits<double>::quiet_NaN()) == 10'000'000.0);
    CHECK(sanitize(std::numeric_limits<double>::quiet_NaN(), 3.0) == 3.0);
}

TEST_CASE("mad examples") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(mad(a) == 1.0);
    const std::vector<double> c(7, 3.25);
    CHECK(mad(c) == 0.0);
    const std::vector<double> b{15.96, 0};
    CHECK(mad(b) == doctest::Approx(7.98).epsilon(1e-15));
    CHECK(mad(b) == doctest::Approx(oracle_mad(b)).epsilon(1e-15));
    CHECK_THROWS_AS(mad(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("property: mad against an oracle, translation and scaling") {
    Rng rng(2);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 50)(rng);
        std::vector<double> xs(n);
        for (auto& x : xs) {
            x = std::uniform_real_distribution<double>(-100, 100)(rng);
        }
        const double m = mad(xs);
        CHECK(m >= 0.0);
        CHECK(std::fabs(m - oracle_mad(xs)) <= 1e-12 * std::max(1.0, oracle_mad(xs)));
        const double c = std::uniform_real_distribution<double>(-10, 10)(rng);
        std::vector<double> shifted(xs);
        std::vector<double> scaled(xs);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            shifted[k] += c;
            scaled[k] *= c;
        }
        CHECK(std::fabs(mad(shifted) - m) <= 1e-9 * std::max(1.0, m));
        CHECK(std::fabs(mad(scaled) - std::fabs(c) * m) <= 1e-9 * std::max(1.0, std::fabs(c) * m));
    }
}

TEST_CASE("utility edge cases") {
    const auto spec = bmi_spec();
    TbcConfig cfg;
    const auto gp1 = parse_expr("Mult(weight,Exp(-1.1518922634307343))", spec);
    CHECK(utility(Committee{{gp1}}, bmi_at(1.7, 50.49), spec, cfg).mad == 0.0);
    CHECK(utility(Committee{{gp1, gp1, gp1}}, bmi_at(-3.0, 7.0), spec, cfg).mad == 0.0);
    // two models disagreeing by a non-finite prediction: sanitized value, never inf
    const auto inf = parse_expr("Div(1.0,0.0)", spec);
    const auto zero = parse_expr("0.0", spec);
    CHECK(utility(Committee{{inf, zero}}, bmi_at(1.0, 1.0), spec, cfg).mad == 5'000'000.0);
}

TEST_CASE("walkthrough committee on the Table 2 pool") {
    const auto spec = bmi_spec();
    const auto committee = paper_committee(spec);
    TbcConfig cfg;
    const auto s0 = utility(committee, bmi_at(87.95, 50.49), spec, cfg).mad;
    const auto s1 = utility(committee, bmi_at(-62.41, 91.14), spec, cfg).mad;
    const auto s2 = utility(committee, bmi_at(26.44, 56.65), spec, cfg).mad;
    // independent arithmetic for the disputed input
    const double p1 = 91.14 * std::exp(-1.1518922634307343);
    const double p2 = -62.41 / std::exp(-62.41 - std::log(91.14));
    CHECK(s1 == doctest::Approx(std::fabs(p1 - p2) / 2).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(3.6e30).epsilon(0.05));
    CHECK(s1 > 1e25 * s0);
    CHECK(s1 > 1e25 * s2);

    std::vector<InputVector> pool{bmi_at(87.95, 50.49), bmi_at(-62.41, 91.14), bmi_at(26.44, 56.65)};
    const auto picked = select_next_tests(committee, pool, 1, bmi, spec, cfg);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].pool_index == 1);
    CHECK(picked[0].execution.input == bmi_at(-62.41, 91.14));
    CHECK(picked[0].execution.observed == bmi(bmi_at(-62.41, 91.14)));
    CHECK(pool.size() == 2);
}

TEST_CASE("select_next_tests: whole pool, ties, argmax oracle") {
    const auto spec = bmi_spec();
    const auto committee = paper_committee(spec);
    TbcConfig cfg;
    std::vector<InputVector> pool{bmi_at(1, 2), bmi_at(3, 4), bmi_at(5, 6)};
    const auto all = select_next_tests(committee, pool, 3, bmi, spec, cfg);
    CHECK(all.size() == 3);
    CHECK(pool.empty());

    std::vector<InputVector> same(4, bmi_at(2.0, 3.0));
    CHECK(select_next_tests(committee, same, 1, bmi, spec, cfg)[0].pool_index == 0);

    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<InputVector> p;
        for (int k = 0; k < 20; ++k) {
            p.push_back(sample_random_input(spec, rng));
        }
        const auto copy = p;
        const auto sel = select_next_tests(committee, p, 1, bmi, spec, cfg);
        for (std::size_t k = 0; k < copy.size(); ++k) {
            const double other = utility(committee, copy[k], spec, cfg).mad;
            CHECK(sel[0].mad >= other);
            if (k < sel[0].pool_index) {
                CHECK(sel[0].mad > other);
            }
        }
    }
}

TEST_CASE("run_tbc suite arithmetic") {
    const auto spec = bmi_spec();
    const std::vector<InputVector> seeds{bmi_at(1.7, 50), bmi_at(1.8, 70), bmi_at(1.9, 100),
                                         bmi_at(1.7, 110), bmi_at(0.0, 5), bmi_at(5.0, 0)};
    Rng rng(7);
    const auto none = run_tbc(spec, seeds, small_tbc(0, 1, 3), bmi, rng);
    REQUIRE(none.executions.size() == 6);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(none.executions[k].input == seeds[k]);
    }

    const auto one = run_tbc(spec, seeds, small_tbc(1, 1, 3), bmi, rng);
    CHECK(one.executions.size() == 7);
    REQUIRE(one.iterations.size() == 1);
    CHECK(one.iterations[0].selected.size() == 1);

    const auto many = run_tbc(spec, seeds, small_tbc(60, 5, 20), bmi, rng);
    CHECK(many.executions.size() == 306);
}

TEST_CASE("run_tbc is deterministic and never feeds non-finite values to mad") {
    const auto spec = bmi_spec();
    const std::vector<InputVector> seeds{bmi_at(1.7, 50), bmi_at(0.0, 5), bmi_at(5.0, 0)};
    reset_nonfinite_violations();
    Rng a(13);
    Rng b(13);
    const auto ra = run_tbc(spec, seeds, small_tbc(4, 3, 30), bmi, a);
    const auto rb = run_tbc(spec, seeds, small_tbc(4, 3, 30), bmi, b);
    CHECK(ra.executions == rb.executions);
    CHECK(nonfinite_violations() == 0);
}

TEST_CASE("run_tbc keeps partial results when the system under test fails") {
    const auto spec = bmi_spec();
    const std::vector<InputVector> seeds{bmi_at(1.7, 50), bmi_at(1.8, 70)};
    int calls = 0;
    const Executor flaky = [&](const InputVector& in) {
        if (++calls > 4) {
            throw ExecutionError("boom");
        }
        return bmi(in);
    };
    Rng rng(1);
    try {
        run_tbc(spec, seeds, small_tbc(3, 1, 5), flaky, rng);
        FAIL("expected a campaign error");
    } catch (const CampaignError& e) {
        CHECK(e.partial().executions.size() == 4);
        CHECK(e.offending_input().size() == 2);
    }
}
