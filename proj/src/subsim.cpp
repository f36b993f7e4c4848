#include "ptsa/subsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "ptsa/parallel.hpp"
#include "ptsa/stats.hpp"

namespace ptsa {

namespace {

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-9; }

}  // namespace

void SubSimConfig::validate() const {
    if (!(p0 > 0.0) || !(p0 < 0.5))
        throw Error(ErrorCode::invalid_argument, "p0 must lie in (0, 0.5)");
    if (n_bat < 2) throw Error(ErrorCode::invalid_argument, "n_bat must be at least 2");
    if (!is_integral(p0 * n_bat) || !is_integral(1.0 / p0))
        throw Error(ErrorCode::invalid_argument,
                    "p0*n_bat and 1/p0 must both be positive integers");
    if (std::lround(p0 * n_bat) < 1)
        throw Error(ErrorCode::invalid_argument, "p0*n_bat must be at least 1");
    if (!(proposal_spread > 0.0))
        throw Error(ErrorCode::invalid_argument, "proposal spread must be positive");
    if (max_levels < 1) throw Error(ErrorCode::invalid_argument, "max_levels must be at least 1");
}

int SubSimConfig::seeds_per_level() const { return static_cast<int>(std::lround(p0 * n_bat)); }

int SubSimConfig::chain_length() const { return static_cast<int>(std::lround(1.0 / p0)) - 1; }

DmcResult run_dmc(const LimitState& limit_state, const InputModel& model, long n,
                  std::uint64_t seed, int parallelism, bool keep_samples) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "dmc needs n >= 1");
    DmcResult result;
    result.n = n;

    std::vector<double> margins(static_cast<size_t>(n));
    if (keep_samples) result.samples.resize(static_cast<size_t>(n));
    parallel_for(static_cast<size_t>(n), parallelism, [&](size_t i) {
        RngStream rng = derive_stream(seed, {rng_tag::dmc, static_cast<std::uint64_t>(i)});
        const ScenarioPoint point = make_scenario(model, model.sample_u(rng));
        const double m = limit_state(point);
        margins[i] = m;
        if (keep_samples) {
            MarginSample s;
            s.point = point;
            s.ptsm_cycles = m;
            result.samples[i] = std::move(s);
        }
    });

    for (double m : margins)
        if (m < 0.0) ++result.n_ti;
    result.p_f_hat = static_cast<double>(result.n_ti) / static_cast<double>(n);
    if (result.n_ti > 0) {
        result.analytic_cov =
            std::sqrt((1.0 - result.p_f_hat) / (static_cast<double>(n) * result.p_f_hat));
        result.cov_defined = true;
    }
    return result;
}

double percentile_threshold(const std::vector<double>& sorted_margins, double p0, int n_bat) {
    if (static_cast<int>(sorted_margins.size()) != n_bat)
        throw Error(ErrorCode::invalid_argument, "margin list length must equal n_bat");
    const int n_s = static_cast<int>(std::lround(p0 * n_bat));
    if (n_s < 1 || n_s >= n_bat)
        throw Error(ErrorCode::invalid_argument, "p0*n_bat out of range for the threshold");
    return 0.5 * (sorted_margins[static_cast<size_t>(n_s) - 1] +
                  sorted_margins[static_cast<size_t>(n_s)]);
}

std::vector<MarginSample> mh_chain(const MarginSample& seed, double threshold, int length,
                                   double proposal_spread, const LimitState& limit_state,
                                   const InputModel& model, RngStream& rng) {
    if (!(seed.ptsm_cycles <= threshold))
        throw Error(ErrorCode::internal, "chain seed violates its level threshold");
    if (length < 0) throw Error(ErrorCode::invalid_argument, "chain length must be >= 0");

    std::vector<MarginSample> states;
    states.reserve(static_cast<size_t>(length));
    MarginSample current = seed;
    const int dim = static_cast<int>(current.point.u.size());

    for (int step = 0; step < length; ++step) {
        Eigen::VectorXd cand = current.point.u;
        bool moved = false;
        for (int c = 0; c < dim; ++c) {
            const double xi = current.point.u[c] + proposal_spread * rng.normal();
            // standard-normal density ratio phi(xi)/phi(u_c)
            const double alpha =
                std::exp(0.5 * (current.point.u[c] * current.point.u[c] - xi * xi));
            if (rng.uniform01() < alpha) {
                cand[c] = xi;
                moved = true;
            }
        }
        if (moved) {
            const ScenarioPoint cand_point = make_scenario(model, cand);
            const double m = limit_state(cand_point);
            if (m <= threshold) {
                current = MarginSample{};
                current.point = cand_point;
                current.ptsm_cycles = m;
            }
            // rejected candidates leave the chain where it was, margin reused
        }
        states.push_back(current);
    }
    return states;
}

namespace {

// ascending margin with ties broken by position, so seed selection is stable
std::vector<int> margin_order(const std::vector<MarginSample>& samples) {
    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return samples[static_cast<size_t>(a)].ptsm_cycles <
               samples[static_cast<size_t>(b)].ptsm_cycles;
    });
    return order;
}

long count_failures(const std::vector<MarginSample>& samples) {
    long n_ti = 0;
    for (const auto& s : samples)
        if (s.ptsm_cycles < 0.0) ++n_ti;
    return n_ti;
}

}  // namespace

SubSimResult run_subsim(const LimitState& limit_state, const InputModel& model,
                        const SubSimConfig& cfg, int parallelism) {
    cfg.validate();
    const int n_bat = cfg.n_bat;
    const int n_s = cfg.seeds_per_level();
    const int chain_len = cfg.chain_length();

    SubSimResult result;
    result.p0 = cfg.p0;
    result.n_bat = n_bat;
    std::atomic<long> calls{0};
    auto counted = [&](const ScenarioPoint& p) {
        calls.fetch_add(1, std::memory_order_relaxed);
        return limit_state(p);
    };

    std::vector<MarginSample> current(static_cast<size_t>(n_bat));
    parallel_for(static_cast<size_t>(n_bat), parallelism, [&](size_t i) {
        RngStream rng =
            derive_stream(cfg.seed, {rng_tag::subsim_init, static_cast<std::uint64_t>(i)});
        const ScenarioPoint point = make_scenario(model, model.sample_u(rng));
        MarginSample s;
        s.point = point;
        s.ptsm_cycles = counted(point);
        current[i] = std::move(s);
    });

    double prev_threshold = std::numeric_limits<double>::infinity();
    for (int level = 1;; ++level) {
        LevelRecord rec;
        rec.level = level;
        rec.samples = std::move(current);

        const std::vector<int> order = margin_order(rec.samples);
        std::vector<double> sorted(static_cast<size_t>(n_bat));
        for (int i = 0; i < n_bat; ++i)
            sorted[static_cast<size_t>(i)] = rec.samples[static_cast<size_t>(order[i])].ptsm_cycles;
        const double threshold = percentile_threshold(sorted, cfg.p0, n_bat);
        rec.threshold = threshold;

        if (threshold <= 0.0) {
            // failure is no longer rare at this level: classify and stop
            result.n_ti = count_failures(rec.samples);
            result.levels.push_back(std::move(rec));
            result.q = level;
            break;
        }

        if (threshold >= prev_threshold) {
            result.warnings.push_back(
                "degenerate ties: threshold at level " + std::to_string(level) +
                " did not decrease (margin distribution has atoms)");
        }
        prev_threshold = threshold;

        rec.seed_indices.assign(order.begin(), order.begin() + n_s);
        const LevelRecord& fixed = result.levels.emplace_back(std::move(rec));

        if (level == cfg.max_levels) {
            result.q = level;
            result.n_ti = count_failures(fixed.samples);
            result.p_e_hat =
                static_cast<double>(result.n_ti) / static_cast<double>(n_bat);
            result.p_f_hat = std::pow(cfg.p0, level - 1) * result.p_e_hat;
            result.total_evaluations =
                static_cast<long>(n_bat) + static_cast<long>(level - 1) * (n_bat - n_s);
            result.actual_evaluations = calls.load();
            throw SubsimMaxLevels(std::move(result));
        }

        // next level: each seed contributes itself plus one chain
        std::vector<MarginSample> next(static_cast<size_t>(n_bat));
        parallel_for(static_cast<size_t>(n_s), parallelism, [&](size_t c) {
            RngStream rng = derive_stream(cfg.seed, {rng_tag::subsim_chain,
                                                     static_cast<std::uint64_t>(level),
                                                     static_cast<std::uint64_t>(c)});
            const MarginSample& seed_sample =
                fixed.samples[static_cast<size_t>(fixed.seed_indices[c])];
            const std::vector<MarginSample> states =
                mh_chain(seed_sample, threshold, chain_len, cfg.proposal_spread, counted,
                         model, rng);
            const size_t base = c * static_cast<size_t>(chain_len + 1);
            next[base] = seed_sample;
            for (int k = 0; k < chain_len; ++k)
                next[base + 1 + static_cast<size_t>(k)] = states[static_cast<size_t>(k)];
        });
        current = std::move(next);
    }

    result.p_e_hat = static_cast<double>(result.n_ti) / static_cast<double>(n_bat);
    result.p_f_hat = std::pow(cfg.p0, result.q - 1) * result.p_e_hat;
    result.total_evaluations =
        static_cast<long>(n_bat) + static_cast<long>(result.q - 1) * (n_bat - n_s);
    result.actual_evaluations = calls.load();
    return result;
}

std::vector<MarginSample> retained_samples(const SubSimResult& result) {
    std::vector<MarginSample> out;
    for (const LevelRecord& rec : result.levels) {
        std::vector<char> promoted(rec.samples.size(), 0);
        for (int idx : rec.seed_indices) promoted[static_cast<size_t>(idx)] = 1;
        for (size_t i = 0; i < rec.samples.size(); ++i)
            if (!promoted[i]) out.push_back(rec.samples[i]);
    }
    return out;
}

RepeatStats repeated_run_statistics(const std::vector<double>& estimates) {
    if (estimates.size() < 2)
        throw Error(ErrorCode::invalid_argument, "need at least two estimates");
    RepeatStats stats;
    stats.n_runs = static_cast<int>(estimates.size());
    stats.mean = stats::mean(estimates);
    for (double e : estimates)
        if (e == 0.0) ++stats.zero_count;
    if (stats.mean != 0.0) {
        stats.cov = stats::sample_std(estimates) / stats.mean;
        stats.cov_defined = true;
    }
    return stats;
}

}  // namespace ptsa
