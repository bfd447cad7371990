#include "tbc/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "tbc/errors.hpp"

namespace tbc {
namespace {

int finiteness_class(double x) noexcept {
    if (std::isnan(x)) {
        return 3;
    }
    if (std::isinf(x)) {
        return x > 0 ? 1 : 2;
    }
    return 0;
}

std::vector<double> midranks(std::span<const double> a, std::span<const double> b, double& tie_term) {
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(n);
    for (std::size_t i = 0; i < a.size(); ++i) {
        all.emplace_back(a[i], i);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        all.emplace_back(b[j], a.size() + j);
    }
    std::sort(all.begin(), all.end());
    std::vector<double> ranks(n);
    tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) {
            ++j;
        }
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            ranks[all[k].second] = rank;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    return ranks;
}

double u_statistic(std::span<const double> a, std::span<const double> b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) {
            u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
        }
    }
    return u;
}

void check_samples(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("rank_sum: empty sample");
    }
}

CampaignReport run_one(Strategy strategy, const Fixture& fixture, const std::vector<InputVector>& seed_tests,
                       const CampaignOptions& options, std::uint64_t seed) {
    CampaignReport report;
    report.strategy = strategy;
    report.seed = seed;
    report.fixture = fixture.id;
    report.mutant_count = fixture.mutants.size();
    const InterfaceSpec spec = fixture.interface();
    Rng rng(seed);
    KillTracker tracker(fixture, options.kill_tolerance);
    const auto per_iteration = static_cast<std::size_t>(options.tbc.tests_per_iteration);

    if (strategy == Strategy::Tbc) {
        std::size_t fed = 0;
        auto observer = [&](const IterationRecord& record, const std::vector<Execution>& executions) {
            if (fed == 0) {
                for (std::size_t k = 0; k < seed_tests.size(); ++k) {
                    tracker.add(executions[k]);
                }
                fed = seed_tests.size();
                report.rows.push_back({0, fed, tracker.killed(), std::nullopt});
            }
            for (; fed < executions.size(); ++fed) {
                tracker.add(executions[fed]);
            }
            report.rows.push_back({record.iteration, fed, tracker.killed(), record.best_fitness_error});
        };
        TbcResult result = run_tbc(spec, seed_tests, options.tbc, fixture.reference, rng, observer);
        if (report.rows.empty()) {
            for (const auto& e : result.executions) {
                tracker.add(e);
            }
            report.rows.push_back({0, result.executions.size(), tracker.killed(), std::nullopt});
        }
        report.suite = std::move(result.executions);
        return report;
    }

    const std::size_t budget = seed_tests.size() + per_iteration * static_cast<std::size_t>(options.tbc.iterations);
    const auto inputs = generate_suite(strategy, spec, seed_tests, budget, options.art, rng);
    report.suite.reserve(inputs.size());
    for (const auto& input : inputs) {
        report.suite.push_back({input, fixture.reference(input)});
    }
    std::size_t fed = 0;
    for (int it = 0; it <= options.tbc.iterations; ++it) {
        const std::size_t size = seed_tests.size() + per_iteration * static_cast<std::size_t>(it);
        for (; fed < size; ++fed) {
            tracker.add(report.suite[fed]);
        }
        report.rows.push_back({it, size, tracker.killed(), std::nullopt});
    }
    return report;
}

std::string csv_double(double x) {
    return format_double(x);
}

} // namespace

bool outputs_differ(double original, double mutant, double tolerance) noexcept {
    const int co = finiteness_class(original);
    if (co != finiteness_class(mutant)) {
        return true;
    }
    if (co != 0) {
        return false;
    }
    return std::abs(mutant - original) > tolerance * std::max(1.0, std::abs(original));
}

KillTracker::KillTracker(const Fixture& fixture, double tolerance) : fixture_(&fixture), tolerance_(tolerance) {
    records_.reserve(fixture.mutants.size());
    for (std::size_t m = 0; m < fixture.mutants.size(); ++m) {
        records_.push_back({m, fixture.mutants[m].name, false, std::nullopt});
    }
}

void KillTracker::add(const Execution& test) {
    for (auto& r : records_) {
        if (r.killed) {
            continue;
        }
        const double out = fixture_->mutants[r.mutant].function(test.input);
        if (outputs_differ(test.observed, out, tolerance_)) {
            r.killed = true;
            r.witness = test.input;
            ++killed_;
        }
    }
}

std::vector<KillRecord> kills(std::span<const Execution> tests, const Fixture& fixture, double tolerance) {
    KillTracker tracker(fixture, tolerance);
    for (const auto& t : tests) {
        tracker.add(t);
    }
    return tracker.records();
}

std::vector<KillRecord> kills(std::span<const Execution> tests, std::string_view fixture_id, double tolerance) {
    return kills(tests, find_fixture(fixture_id), tolerance);
}

std::size_t kill_count(std::span<const KillRecord> records) noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const KillRecord& r) { return r.killed; }));
}

std::vector<CampaignReport> run_campaign(Strategy strategy, std::string_view fixture_id,
                                         const std::vector<InputVector>& seed_tests, const CampaignOptions& options,
                                         std::span<const std::uint64_t> seeds) {
    options.tbc.validate();
    if (options.art.candidate_set_size < 1) {
        throw ValidationError("candidateSetSize", "must be positive");
    }
    if (!(options.kill_tolerance >= 0.0)) {
        throw ValidationError("killTolerance", "must be non-negative");
    }
    const Fixture& fixture = find_fixture(fixture_id);
    const InterfaceSpec spec = fixture.interface();
    for (const auto& t : seed_tests) {
        if (!conforms(t, spec)) {
            throw ValidationError("seedTests", "seed test \"" + format_input(t) + "\" does not match " + fixture.id);
        }
    }

    std::vector<CampaignReport> done;
    done.reserve(seeds.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    for (std::size_t start = 0; start < seeds.size(); start += jobs) {
        const std::size_t end = std::min(seeds.size(), start + jobs);
        std::vector<std::future<CampaignReport>> batch;
        for (std::size_t k = start; k < end; ++k) {
            const auto launch = jobs > 1 ? std::launch::async : std::launch::deferred;
            batch.push_back(std::async(launch, [&, k] {
                return run_one(strategy, fixture, seed_tests, options, seeds[k]);
            }));
        }
        std::string failure;
        for (auto& f : batch) {
            try {
                done.push_back(f.get());
            } catch (const std::exception& e) {
                if (failure.empty()) {
                    failure = e.what();
                }
            }
        }
        if (!failure.empty()) {
            throw HarnessError(std::string(strategy_name(strategy)) + " run failed: " + failure, std::move(done));
        }
    }
    return done;
}

double rank_sum_exact_p(std::span<const double> a, std::span<const double> b) {
    check_samples(a, b);
    const std::size_t na = a.size();
    const std::size_t n = na + b.size();
    if (n > 24) {
        throw std::invalid_argument("rank_sum_exact_p: samples too large to enumerate");
    }
    const double u = u_statistic(a, b);
    // U = R_a - na(na+1)/2 for every placement of a's ranks among 1..n
    const double offset = static_cast<double>(na * (na + 1)) / 2.0;
    std::uint64_t at_most = 0;
    std::uint64_t total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != na) {
            continue;
        }
        double ranks = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (mask & (1u << r)) {
                ranks += static_cast<double>(r + 1);
            }
        }
        ++total;
        if (ranks - offset <= u + 1e-9) {
            ++at_most;
        }
    }
    return static_cast<double>(at_most) / static_cast<double>(total);
}

double rank_sum_normal_p(std::span<const double> a, std::span<const double> b) {
    check_samples(a, b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;
    double tie_term = 0.0;
    const auto ranks = midranks(a, b, tie_term);
    double ra = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ra += ranks[i];
    }
    const double u = ra - na * (na + 1.0) / 2.0;
    const double mean = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        return 1.0;
    }
    const double z = (u - mean + 0.5) / std::sqrt(var);
    return std::min(1.0, 0.5 * std::erfc(-z / std::sqrt(2.0)));
}

RankSumResult rank_sum(std::span<const double> a, std::span<const double> b) {
    check_samples(a, b);
    RankSumResult r;
    r.u = u_statistic(a, b);
    double tie_term = 0.0;
    midranks(a, b, tie_term);
    if (a.size() + b.size() <= 12 && tie_term == 0.0) {
        r.exact = true;
        r.p_one_sided = rank_sum_exact_p(a, b);
    } else {
        r.p_one_sided = rank_sum_normal_p(a, b);
    }
    return r;
}

std::string emit_csv(std::span<const CampaignReport> reports) {
    std::ostringstream out;
    out << "strategy,seed,iteration,suite_size,kills,best_fitness_error\n";
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            out << strategy_name(r.strategy) << ',' << r.seed << ',' << row.iteration << ',' << row.suite_size << ','
                << row.kills << ',' << (row.best_fitness_error ? csv_double(*row.best_fitness_error) : "") << '\n';
        }
    }
    return out.str();
}

std::string emit_summary(std::span<const CampaignReport> reports) {
    std::vector<Strategy> order;
    std::map<Strategy, std::vector<double>> finals;
    for (const auto& r : reports) {
        if (std::find(order.begin(), order.end(), r.strategy) == order.end()) {
            order.push_back(r.strategy);
        }
        finals[r.strategy].push_back(r.rows.empty() ? 0.0 : static_cast<double>(r.rows.back().kills));
    }
    nlohmann::ordered_json j;
    j["fixture"] = reports.empty() ? "" : reports.front().fixture;
    j["mutants"] = reports.empty() ? 0 : reports.front().mutant_count;
    nlohmann::ordered_json strategies = nlohmann::ordered_json::object();
    for (Strategy s : order) {
        const auto& f = finals[s];
        const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
        strategies[std::string(strategy_name(s))] = {{"runs", f.size()}, {"meanFinalKills", mean}, {"finalKills", f}};
    }
    j["strategies"] = strategies;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (Strategy a : order) {
        for (Strategy b : order) {
            if (a == b) {
                continue;
            }
            // alternative: a kills more than b, so b's U falls in the lower tail
            const auto test = rank_sum(finals[b], finals[a]);
            pairs.push_back({{"a", strategy_name(a)},
                             {"b", strategy_name(b)},
                             {"alternative", "greater"},
                             {"uB", test.u},
                             {"pOneSided", test.p_one_sided},
                             {"method", test.exact ? "exact" : "normal"}});
        }
    }
    j["pairwise"] = pairs;
    // reported, not asserted: at desk scale the ordering of means is stochastic
    if (finals.contains(Strategy::Tbc)) {
        nlohmann::ordered_json directional = nlohmann::ordered_json::object();
        const auto& f = finals[Strategy::Tbc];
        const double tbc_mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
        for (Strategy s : order) {
            if (s == Strategy::Tbc) {
                continue;
            }
            const auto& g = finals[s];
            const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
            directional["tbcMeanAtLeast_" + std::string(strategy_name(s))] = tbc_mean >= mean;
        }
        j["directional"] = directional;
    }
    return j.dump(2) + "\n";
}

ReportText emit_report(std::span<const CampaignReport> reports) {
    return {emit_csv(reports), emit_summary(reports)};
}

} // namespace tbc
