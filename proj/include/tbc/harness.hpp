#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tbc/generators.hpp"
#include "tbc/gp.hpp"
#include "tbc/qbc.hpp"
#include "tbc/sut.hpp"

namespace tbc {

inline constexpr double kDefaultKillTolerance = 1e-9;

struct KillRecord {
    std::size_t mutant = 0;
    std::string name;
    bool killed = false;
    // first test that distinguishes the mutant; present iff killed
    std::optional<InputVector> witness;
};

/// True when a mutant output is distinguishable from the original: a different finiteness
/// class (finite, +inf, -inf, NaN), or finite values further apart than tol * max(1, |original|).
bool outputs_differ(double original, double mutant, double tolerance = kDefaultKillTolerance) noexcept;

/// Mutation analysis of a suite labeled against the original fixture.
std::vector<KillRecord> kills(std::span<const Execution> tests, const Fixture& fixture,
                              double tolerance = kDefaultKillTolerance);
std::vector<KillRecord> kills(std::span<const Execution> tests, std::string_view fixture_id,
                              double tolerance = kDefaultKillTolerance);

std::size_t kill_count(std::span<const KillRecord> records) noexcept;

/// Incremental form of kills(): feeding tests one at a time yields the same records as one
/// batch call over the concatenation.
class KillTracker {
public:
    explicit KillTracker(const Fixture& fixture, double tolerance = kDefaultKillTolerance);

    void add(const Execution& test);
    std::size_t killed() const noexcept { return killed_; }
    const std::vector<KillRecord>& records() const noexcept { return records_; }

private:
    const Fixture* fixture_;
    double tolerance_;
    std::vector<KillRecord> records_;
    std::size_t killed_ = 0;
};

struct IterationRow {
    int iteration = 0;
    std::size_t suite_size = 0;
    std::size_t kills = 0;
    // TBC only, absent for the seed row
    std::optional<double> best_fitness_error;
};

struct CampaignReport {
    Strategy strategy = Strategy::Tbc;
    std::uint64_t seed = 0;
    std::string fixture;
    std::size_t mutant_count = 0;
    std::vector<IterationRow> rows;
    std::vector<Execution> suite;
};

struct CampaignOptions {
    TbcConfig tbc{};
    ArtConfig art{};
    double kill_tolerance = kDefaultKillTolerance;
    // independent seeded runs executed concurrently
    int jobs = 1;
};

/// Raised when a run fails; reports of the runs that completed are preserved.
class HarnessError : public std::runtime_error {
public:
    HarnessError(const std::string& what, std::vector<CampaignReport> completed)
        : std::runtime_error(what), completed_(std::move(completed)) {}

    const std::vector<CampaignReport>& completed() const noexcept { return completed_; }

private:
    std::vector<CampaignReport> completed_;
};

/// One report per seed. Every strategy spends `tests_per_iteration` tests per iteration on the
/// same grid, so rows of equal iteration have equal suite sizes across strategies.
std::vector<CampaignReport> run_campaign(Strategy strategy, std::string_view fixture_id,
                                         const std::vector<InputVector>& seed_tests, const CampaignOptions& options,
                                         std::span<const std::uint64_t> seeds);

struct RankSumResult {
    // Mann-Whitney U of the first sample (pairs a_i > b_j, ties counted one half)
    double u = 0.0;
    // P(U <= u) under the null: small when the first sample tends to be smaller
    double p_one_sided = 1.0;
    bool exact = false;
};

/// Wilcoxon rank-sum test with midranks. Exact enumeration when n_a + n_b <= 12 and there
/// are no ties, otherwise the tie-corrected normal approximation with continuity correction.
/// Throws std::invalid_argument for an empty sample.
RankSumResult rank_sum(std::span<const double> a, std::span<const double> b);
double rank_sum_exact_p(std::span<const double> a, std::span<const double> b);
double rank_sum_normal_p(std::span<const double> a, std::span<const double> b);

/// One CSV row per strategy x seed x iteration:
/// `strategy,seed,iteration,suite_size,kills,best_fitness_error`.
std::string emit_csv(std::span<const CampaignReport> reports);

/// JSON summary: per-strategy final-kill means and pairwise one-sided rank-sum p-values.
std::string emit_summary(std::span<const CampaignReport> reports);

struct ReportText {
    std::string csv;
    std::string summary;
};

ReportText emit_report(std::span<const CampaignReport> reports);

} // namespace tbc
