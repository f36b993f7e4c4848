#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptsa/limit_state.hpp"
#include "ptsa/subsim.hpp"

namespace ptsa {

/// Margin-space bins B_0..B_q induced by the subset thresholds and 0, with the
/// exact probability of each bin implied by the nested-subset construction.
struct BinPartition {
    int q = 1;
    double p0 = 0.1;
    double p_e_hat = 0.0;
    std::vector<double> thresholds;     // t_1..t_{q-1}, strictly decreasing, positive
    std::vector<double> probabilities;  // P_0..P_q

    static BinPartition make(int q, double p0, double p_e_hat, std::vector<double> thresholds);
    static BinPartition from_subsim(const SubSimResult& result);

    /// Which bin a margin falls in: q for failures (margin < 0), otherwise the
    /// deepest subset whose threshold still covers the margin.
    int bin_of(double margin) const;
};

/// P_0 = 1-p0, P_k = p0^k(1-p0), .., P_{q-1} = p0^(q-1)(1-p_e), P_q = p0^(q-1)p_e.
std::vector<double> bin_probabilities(int q, double p0, double p_e_hat);

/// Axis split into H intervals at equally spaced percentiles of one marginal.
struct IntervalGrid1D {
    int input_index = 0;
    std::vector<double> edges;  // H+1 edges; outer ones at the support limits

    static IntervalGrid1D make(const InputModel& model, int input_index, int intervals);
    int interval_count() const { return static_cast<int>(edges.size()) - 1; }
    int interval_of(double value) const;
};

struct IntervalGrid2D {
    IntervalGrid1D axis_i;
    IntervalGrid1D axis_j;

    static IntervalGrid2D make(const InputModel& model, int i, int j, int intervals_per_axis);
    int cell_count() const { return axis_i.interval_count() * axis_j.interval_count(); }
    int cell_of(double value_i, double value_j) const;
};

/// Stratified estimate of P(X in J_h) per interval: sum_k (N_kh / N_k) P_k.
std::vector<double> interval_probability(const IntervalGrid1D& grid,
                                         const BinPartition& partition,
                                         const std::vector<MarginSample>& samples);

/// Conditional-on-failure version: ratio of stratified sums over N_khF and N_kF.
std::vector<double> conditional_interval_probability(const IntervalGrid1D& grid,
                                                     const BinPartition& partition,
                                                     const std::vector<MarginSample>& samples);

std::vector<double> interval_probability_2d(const IntervalGrid2D& grid,
                                            const BinPartition& partition,
                                            const std::vector<MarginSample>& samples);

std::vector<double> conditional_interval_probability_2d(const IntervalGrid2D& grid,
                                                        const BinPartition& partition,
                                                        const std::vector<MarginSample>& samples);

/// Half L1 distance between two distributions on a common grid.
double tvd_1d(const std::vector<double>& unconditional, const std::vector<double>& conditional);
double tvd_2d(const std::vector<double>& unconditional, const std::vector<double>& conditional);

struct SensitivityConfig {
    int intervals_1d = 100;  // per independent input
    int intervals_2d = 20;   // per axis of a correlated pair
};

struct IntervalCell {
    double lower = 0.0;
    double upper = 0.0;
    double lower2 = 0.0;  // second axis, 2-D grids only
    double upper2 = 0.0;
    double p_uncond = 0.0;
    double p_cond = 0.0;
};

struct InputTvd {
    std::string name;
    std::vector<int> inputs;  // one index, or the two of a correlated pair
    double eta = 0.0;
    std::vector<IntervalCell> cells;
};

struct TvdReport {
    std::vector<InputTvd> entries;

    nlohmann::json to_json() const;
    void write_csv(const std::string& path) const;
    /// eta of the entry whose inputs == {index}; throws if absent.
    double eta_for(int index) const;
};

/// Whole-model ranking: 1-D grids for inputs outside any copula pair, one 2-D
/// grid per correlated pair.
TvdReport analyze_sensitivity(const std::vector<MarginSample>& samples,
                              const BinPartition& partition, const InputModel& model,
                              const SensitivityConfig& cfg = {});

struct CompensationResult {
    int target_index = 0;
    std::string target_name;
    double clamp_value = 0.0;  // physical units
    long n_ti_before = 0;
    long n_ti_after = 0;       // remaining TI among the formerly-TI set
    long n_clamped = 0;        // formerly-TI samples that actually moved
    bool full_reevaluation = false;
    long n_ti_after_full = 0;  // meaningful only when full_reevaluation
};

/// Clamp one Gaussian input at mu - clamp_sigmas*sigma from below and recheck
/// stability of the formerly-TI samples (optionally of every clamped sample).
CompensationResult compensation_test(const std::vector<MarginSample>& samples, int target_index,
                                     double clamp_sigmas, const LimitState& limit_state,
                                     const InputModel& model, int parallelism = 1,
                                     bool full_reevaluation = false);

}  // namespace ptsa
