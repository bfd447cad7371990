#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tbc/harness.hpp"

using namespace tbc;

namespace {

InputVector bmi_at(double h, double w) { return {Value{h}, Value{w}}; }

std::vector<Execution> labeled(const Fixture& f, const std::vector<InputVector>& inputs) {
    std::vector<Execution> out;
    for (const auto& in : inputs) {
        out.push_back({in, f.reference(in)});
    }
    return out;
}

// every (test, mutant) pair re-executed independently; first distinguishing test is the witness
std::vector<std::optional<InputVector>> oracle_kills(const Fixture& f, const std::vector<Execution>& tests) {
    std::vector<std::optional<InputVector>> result(f.mutants.size());
    for (std::size_t m = 0; m < f.mutants.size(); ++m) {
        for (const auto& t : tests) {
            const double o = t.observed;
            const double v = f.mutants[m].function(t.input);
            const bool o_fin = std::isfinite(o);
            const bool v_fin = std::isfinite(v);
            bool differ = false;
            if (o_fin && v_fin) {
                differ = std::fabs(v - o) > 1e-9 * std::max(1.0, std::fabs(o));
            } else {
                const bool same_class = (std::isnan(o) && std::isnan(v)) || (!o_fin && !v_fin && o == v);
                differ = !same_class;
            }
            if (differ) {
                result[m] = t.input;
                break;
            }
        }
    }
    return result;
}

CampaignOptions tiny_options(int iterations) {
    CampaignOptions o;
    o.tbc.iterations = iterations;
    o.tbc.tests_per_iteration = 3;
    o.tbc.random_pool_size = 50;
    o.tbc.committee_size = 5;
    o.tbc.gp.population_size = 40;
    o.tbc.gp.max_generations = 5;
    return o;
}

} // namespace

TEST_CASE("outputs_differ") {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(outputs_differ(1.0, 1.0));
    CHECK_FALSE(outputs_differ(1e12, 1e12 + 1.0));
    CHECK(outputs_differ(1.0, 1.0 + 1e-6));
    CHECK(outputs_differ(inf, -inf));
    CHECK(outputs_differ(inf, nan));
    CHECK(outputs_differ(5.0, inf));
    CHECK_FALSE(outputs_differ(inf, inf));
    CHECK_FALSE(outputs_differ(nan, nan));
}

TEST_CASE("kill examples") {
    const auto& bmi = find_fixture("bmi");
    const auto tests = labeled(bmi, {bmi_at(1.7, 50)});
    const auto records = kills(tests, "bmi");
    REQUIRE(records[0].name == "weight/height");
    CHECK(records[0].killed);
    CHECK(*records[0].witness == bmi_at(1.7, 50));
    CHECK(kill_count(kills(std::vector<Execution>{}, "bmi")) == 0);
    CHECK_THROWS(kills(tests, "unknown"));

    Fixture control = bmi;
    control.mutants = {Mutant{"identity", "unchanged", bmi.reference, bmi_at(1, 1)}};
    Rng rng(1);
    std::vector<InputVector> many = bmi.seed_tests;
    for (int k = 0; k < 300; ++k) {
        many.push_back(sample_random_input(bmi.interface(), rng));
    }
    CHECK(kill_count(kills(labeled(bmi, many), control)) == 0);
}

TEST_CASE("property: kills match the brute-force oracle, grow monotonically, and track incrementally") {
    Rng rng(12);
    for (const auto& f : catalog()) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<InputVector> inputs = f.seed_tests;
            const int extra = trial * 3;
            for (int k = 0; k < extra; ++k) {
                inputs.push_back(sample_random_input(f.interface(), rng));
            }
            const auto tests = labeled(f, inputs);
            const auto records = kills(tests, f);
            const auto oracle = oracle_kills(f, tests);
            for (std::size_t m = 0; m < records.size(); ++m) {
                CHECK(records[m].killed == oracle[m].has_value());
                CHECK(records[m].witness == oracle[m]);
            }
            KillTracker tracker(f);
            std::size_t previous = 0;
            for (const auto& t : tests) {
                tracker.add(t);
                CHECK(tracker.killed() >= previous);
                previous = tracker.killed();
            }
            CHECK(previous == kill_count(records));
        }
    }
}

TEST_CASE("rank_sum examples") {
    const std::vector<double> a{1, 2};
    const std::vector<double> b{3, 4};
    const auto r = rank_sum(a, b);
    CHECK(r.u == 0.0);
    CHECK(r.exact);
    CHECK(r.p_one_sided == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    const std::vector<double> same{3, 1, 2, 2};
    CHECK(rank_sum(same, same).u == 8.0);
    CHECK_THROWS_AS(rank_sum(std::vector<double>{}, b), std::invalid_argument);
    CHECK_THROWS_AS(rank_sum(a, std::vector<double>{}), std::invalid_argument);
    // all values tied: no evidence either way
    const std::vector<double> flat{5, 5, 5};
    CHECK(rank_sum(flat, flat).p_one_sided == 1.0);
}

TEST_CASE("property: U_a + U_b = |a||b| and exact p matches enumeration") {
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const int na = std::uniform_int_distribution<int>(1, 8)(rng);
        const int nb = std::uniform_int_distribution<int>(1, 8)(rng);
        std::vector<double> a(na);
        std::vector<double> b(nb);
        for (auto& x : a) {
            x = std::uniform_int_distribution<int>(0, 6)(rng);
        }
        for (auto& x : b) {
            x = std::uniform_int_distribution<int>(0, 6)(rng);
        }
        const auto ab = rank_sum(a, b);
        const auto ba = rank_sum(b, a);
        CHECK(ab.u + ba.u == static_cast<double>(na * nb));
        CHECK(ab.p_one_sided >= 0.0);
        CHECK(ab.p_one_sided <= 1.0);
    }
    // without ties the exact lower tail and upper tail sum to 1 + P(U = u)
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(5);
        std::vector<double> b(6);
        for (auto& x : a) {
            x = std::uniform_real_distribution<double>(0, 1)(rng);
        }
        for (auto& x : b) {
            x = std::uniform_real_distribution<double>(0, 1)(rng);
        }
        const double lower = rank_sum_exact_p(a, b);
        const double upper = rank_sum_exact_p(b, a);
        CHECK(lower + upper >= 1.0);
        CHECK(lower + upper <= 1.0 + 0.1);
    }
}

TEST_CASE("run_campaign shapes") {
    const auto& f = find_fixture("piecewise");
    const std::vector<std::uint64_t> one{3};
    for (auto s : {Strategy::Tbc, Strategy::Random, Strategy::Art}) {
        const auto reports = run_campaign(s, "piecewise", f.seed_tests, tiny_options(0), one);
        REQUIRE(reports.size() == 1);
        REQUIRE(reports[0].rows.size() == 1);
        CHECK(reports[0].rows[0].suite_size == f.seed_tests.size());
        CHECK(reports[0].rows[0].kills == kill_count(kills(labeled(f, f.seed_tests), f)));
    }

    const std::vector<std::uint64_t> seeds{1, 2};
    std::map<Strategy, std::vector<CampaignReport>> by;
    for (auto s : {Strategy::Tbc, Strategy::Random, Strategy::Art}) {
        by[s] = run_campaign(s, "piecewise", f.seed_tests, tiny_options(4), seeds);
        for (const auto& r : by[s]) {
            REQUIRE(r.rows.size() == 5);
            for (std::size_t k = 1; k < r.rows.size(); ++k) {
                CHECK(r.rows[k].kills >= r.rows[k - 1].kills);
            }
            CHECK(r.suite.size() == f.seed_tests.size() + 12);
            CHECK(r.rows.back().kills == kill_count(kills(r.suite, f)));
        }
    }
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(by[Strategy::Tbc][0].rows[k].suite_size == by[Strategy::Random][0].rows[k].suite_size);
        CHECK(by[Strategy::Tbc][0].rows[k].suite_size == by[Strategy::Art][0].rows[k].suite_size);
    }
    const auto again = run_campaign(Strategy::Tbc, "piecewise", f.seed_tests, tiny_options(4), seeds);
    CHECK(emit_csv(again) == emit_csv(by[Strategy::Tbc]));
    CHECK(again[1].suite == by[Strategy::Tbc][1].suite);

    auto parallel = tiny_options(4);
    parallel.jobs = 2;
    const auto threaded = run_campaign(Strategy::Tbc, "piecewise", f.seed_tests, parallel, seeds);
    CHECK(emit_csv(threaded) == emit_csv(by[Strategy::Tbc]));
}

TEST_CASE("emit_report") {
    CHECK(emit_csv({}) == "strategy,seed,iteration,suite_size,kills,best_fitness_error\n");

    const auto& f = find_fixture("poly3");
    const std::vector<std::uint64_t> seeds{4, 5, 6};
    std::vector<CampaignReport> all;
    for (auto s : {Strategy::Tbc, Strategy::Random, Strategy::Art}) {
        const auto r = run_campaign(s, "poly3", f.seed_tests, tiny_options(3), seeds);
        all.insert(all.end(), r.begin(), r.end());
    }
    const auto text = emit_report(all);
    std::istringstream csv(text.csv);
    std::string line;
    std::getline(csv, line);
    std::size_t rows = 0;
    std::map<std::string, std::pair<double, int>> final_sum;
    while (std::getline(csv, line)) {
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cols.push_back(cell);
        }
        REQUIRE(cols.size() >= 5);
        if (cols[2] == "3") {
            final_sum[cols[0]].first += std::stod(cols[4]);
            final_sum[cols[0]].second += 1;
        }
        if (cols[0] == "tbc" && cols[2] != "0") {
            CHECK(cols.size() == 6);
        }
    }
    CHECK(rows == 3 * 3 * (3 + 1));
    const auto summary = nlohmann::json::parse(text.summary);
    for (const auto& [name, acc] : final_sum) {
        CHECK(summary["strategies"][name]["meanFinalKills"].get<double>() ==
              doctest::Approx(acc.first / acc.second).epsilon(1e-12));
    }
    CHECK(summary["pairwise"].size() == 6);
    for (const auto& p : summary["pairwise"]) {
        CHECK(p["pOneSided"].get<double>() >= 0.0);
        CHECK(p["pOneSided"].get<double>() <= 1.0);
    }
    CHECK(summary.contains("directional"));
}
