#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ptsa/errors.hpp"
#include "ptsa/limit_state.hpp"
#include "ptsa/rng.hpp"

namespace ptsa {

struct SubSimConfig {
    double p0 = 0.1;              // conditional probability per level
    int n_bat = 1000;             // samples per level
    double proposal_spread = 1.0; // componentwise normal proposal, u-space
    int max_levels = 10;
    std::uint64_t seed = 0;

    /// Requires 0 < p0 < 0.5 with p0*n_bat and 1/p0 integral.
    void validate() const;
    int seeds_per_level() const;
    int chain_length() const;  // new states per chain: 1/p0 - 1
};

struct LevelRecord {
    int level = 1;               // 1-based
    double threshold = 0.0;      // percentile threshold computed from this level
    std::vector<MarginSample> samples;   // exactly n_bat entries
    std::vector<int> seed_indices;       // promoted to seed the next level; empty on the last
};

struct SubSimResult {
    double p_f_hat = 0.0;
    int q = 0;                   // number of levels
    double p_e_hat = 0.0;        // final-level conditional failure probability
    double p0 = 0.1;             // copied from the config for downstream analysis
    int n_bat = 0;
    std::vector<LevelRecord> levels;
    long total_evaluations = 0;  // budgeted: n_bat + (q-1)*(1-p0)*n_bat
    long actual_evaluations = 0; // unique limit-state calls (chain repeats reuse margins)
    long n_ti = 0;               // final-level samples with margin < 0
    std::vector<std::string> warnings;
};

/// Raised when the level cap is hit while thresholds are still positive; the
/// partial result carries every completed level.
class SubsimMaxLevels : public Error {
public:
    explicit SubsimMaxLevels(SubSimResult partial)
        : Error(ErrorCode::numerical,
                "subset simulation hit max_levels = " +
                    std::to_string(partial.levels.size()) +
                    " with a still-positive threshold; failure probability is below the "
                    "resolvable range"),
          partial_(std::make_shared<SubSimResult>(std::move(partial))) {}

    const SubSimResult& partial() const { return *partial_; }

private:
    std::shared_ptr<SubSimResult> partial_;
};

struct DmcResult {
    double p_f_hat = 0.0;
    long n = 0;
    long n_ti = 0;
    double analytic_cov = 0.0;  // sqrt((1-p)/(n*p)), meaningful only when cov_defined
    bool cov_defined = false;
    std::vector<MarginSample> samples;  // kept only on request
};

DmcResult run_dmc(const LimitState& limit_state, const InputModel& model, long n,
                  std::uint64_t seed, int parallelism = 1, bool keep_samples = false);

/// Midpoint of the two order statistics flanking the p0 quantile.
/// margins must be sorted ascending with exactly n_bat entries.
double percentile_threshold(const std::vector<double>& sorted_margins, double p0, int n_bat);

/// One conditional chain: `length` new states, each either an accepted move
/// with a fresh margin or a repeat of the previous state with its margin reused.
std::vector<MarginSample> mh_chain(const MarginSample& seed, double threshold, int length,
                                   double proposal_spread, const LimitState& limit_state,
                                   const InputModel& model, RngStream& rng);

SubSimResult run_subsim(const LimitState& limit_state, const InputModel& model,
                        const SubSimConfig& cfg, int parallelism = 1);

/// The retained sample set: every level's non-promoted samples plus the whole
/// final level; size equals total_evaluations.
std::vector<MarginSample> retained_samples(const SubSimResult& result);

struct RepeatStats {
    double mean = 0.0;
    double cov = 0.0;  // sample std / mean, meaningful only when cov_defined
    bool cov_defined = false;
    int zero_count = 0;
    int n_runs = 0;
};

RepeatStats repeated_run_statistics(const std::vector<double>& estimates);

}  // namespace ptsa
