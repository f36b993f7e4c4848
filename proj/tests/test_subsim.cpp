#include "doctest.h"

#include <cmath>
#include <vector>

#include "ptsa/limit_state.hpp"
#include "ptsa/stats.hpp"
#include "ptsa/subsim.hpp"

using namespace ptsa;

namespace {

MarginSample sample_at(const InputModel& model, const LimitState& ls, const Eigen::VectorXd& u) {
    MarginSample s;
    s.point = make_scenario(model, u);
    s.ptsm_cycles = ls(s.point);
    return s;
}

SubSimConfig small_config(std::uint64_t seed, int n_bat = 200) {
    SubSimConfig cfg;
    cfg.n_bat = n_bat;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("subsim config validation and derived sizes") {
    SubSimConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.seeds_per_level() == 100);
    CHECK(cfg.chain_length() == 9);

    cfg.p0 = 0.2;
    cfg.n_bat = 10;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.seeds_per_level() == 2);
    CHECK(cfg.chain_length() == 4);

    cfg = SubSimConfig{};
    cfg.p0 = 0.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("(0, 0.5)"), Error);
    cfg.p0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.p0 = 0.3;  // 1/p0 not an integer
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SubSimConfig{};
    cfg.p0 = 0.25;
    cfg.n_bat = 10;  // p0*n_bat = 2.5
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SubSimConfig{};
    cfg.n_bat = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SubSimConfig{};
    cfg.proposal_spread = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SubSimConfig{};
    cfg.max_levels = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("percentile threshold is the midpoint of the flanking order statistics") {
    const std::vector<double> sorted{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(percentile_threshold(sorted, 0.1, 10) == doctest::Approx(1.5));
    CHECK(percentile_threshold(sorted, 0.2, 10) == doctest::Approx(2.5));

    CHECK_THROWS_WITH_AS(percentile_threshold(sorted, 0.1, 12),
                         doctest::Contains("length must equal n_bat"), Error);
    CHECK_THROWS_WITH_AS(percentile_threshold(sorted, 0.001, 10),
                         doctest::Contains("out of range"), Error);
    CHECK_THROWS_AS(percentile_threshold(sorted, 1.0, 10), Error);
}

TEST_CASE("metropolis chain respects the threshold and its RNG budget") {
    const int dim = 4;
    const InputModel model = make_standard_normal_model(dim);
    const LimitState ls = make_linear_beta_limit_state(2.0);
    const double threshold = 0.7;

    // a seed comfortably inside the conditional region
    Eigen::VectorXd u0 = Eigen::VectorXd::Constant(dim, 0.8);
    const MarginSample seed = sample_at(model, ls, u0);
    REQUIRE(seed.ptsm_cycles <= threshold);

    RngStream rng(123);
    const int length = 25;
    const std::vector<MarginSample> states =
        mh_chain(seed, threshold, length, 1.0, ls, model, rng);
    REQUIRE(static_cast<int>(states.size()) == length);
    int moves = 0;
    for (size_t k = 0; k < states.size(); ++k) {
        CHECK(states[k].ptsm_cycles <= threshold);
        const Eigen::VectorXd& prev = k == 0 ? seed.point.u : states[k - 1].point.u;
        if (states[k].point.u != prev) ++moves;
    }
    CHECK(moves > 0);  // a frozen chain would make the sampler useless

    // the proposal consumes exactly two draws per component per step, always
    RngStream replay(123);
    for (int k = 0; k < 2 * dim * length; ++k) replay.next_u64();
    CHECK(rng.next_u64() == replay.next_u64());

    // reproducibility from an equal stream
    RngStream rng2(123);
    const std::vector<MarginSample> again =
        mh_chain(seed, threshold, length, 1.0, ls, model, rng2);
    for (size_t k = 0; k < states.size(); ++k) {
        CHECK(states[k].point.u == again[k].point.u);
        CHECK(states[k].ptsm_cycles == again[k].ptsm_cycles);
    }

    // infeasible seed is a programming error upstream
    const MarginSample bad = sample_at(model, ls, Eigen::VectorXd::Zero(dim));
    REQUIRE(bad.ptsm_cycles > threshold);
    CHECK_THROWS_WITH_AS(mh_chain(bad, threshold, 5, 1.0, ls, model, rng),
                         doctest::Contains("violates its level threshold"), Error);
    CHECK(mh_chain(seed, threshold, 0, 1.0, ls, model, rng).empty());
    CHECK_THROWS_AS(mh_chain(seed, threshold, -1, 1.0, ls, model, rng), Error);
}

TEST_CASE("subsim level bookkeeping on a two-level analytic problem") {
    const InputModel model = make_standard_normal_model(3);
    const LimitState ls = make_linear_beta_limit_state(2.0);
    const SubSimConfig cfg = small_config(7);
    const int n_s = cfg.seeds_per_level();

    const SubSimResult r = run_subsim(ls, model, cfg);
    REQUIRE(r.q >= 2);
    REQUIRE(static_cast<int>(r.levels.size()) == r.q);
    CHECK(r.p0 == cfg.p0);
    CHECK(r.n_bat == cfg.n_bat);

    for (int l = 0; l < r.q; ++l) {
        const LevelRecord& rec = r.levels[static_cast<size_t>(l)];
        CHECK(rec.level == l + 1);
        CHECK(static_cast<int>(rec.samples.size()) == cfg.n_bat);
        if (l + 1 < r.q) {
            REQUIRE(static_cast<int>(rec.seed_indices.size()) == n_s);
            CHECK(rec.threshold > 0.0);
            // promoted samples sit at or below the level threshold
            for (int idx : rec.seed_indices)
                CHECK(rec.samples[static_cast<size_t>(idx)].ptsm_cycles <= rec.threshold);
            // ... and the threshold splits the batch at the p0 quantile
            int strictly_below = 0, at_or_below = 0;
            for (const MarginSample& s : rec.samples) {
                if (s.ptsm_cycles < rec.threshold) ++strictly_below;
                if (s.ptsm_cycles <= rec.threshold) ++at_or_below;
            }
            CHECK(strictly_below <= n_s);
            CHECK(at_or_below >= n_s);
            // the next level starts from the promoted seeds and stays conditional
            const LevelRecord& next = r.levels[static_cast<size_t>(l) + 1];
            for (const MarginSample& s : next.samples)
                CHECK(s.ptsm_cycles <= rec.threshold);
            for (int c = 0; c < n_s; ++c) {
                const MarginSample& seed =
                    rec.samples[static_cast<size_t>(rec.seed_indices[static_cast<size_t>(c)])];
                const MarginSample& copied =
                    next.samples[static_cast<size_t>(c) *
                                 static_cast<size_t>(cfg.chain_length() + 1)];
                CHECK(copied.point.u == seed.point.u);
            }
        } else {
            CHECK(rec.seed_indices.empty());
            CHECK(rec.threshold <= 0.0);
        }
        if (l > 0) CHECK(rec.threshold < r.levels[static_cast<size_t>(l) - 1].threshold);
    }

    // estimator identities and the evaluation budget
    long n_ti = 0;
    for (const MarginSample& s : r.levels.back().samples)
        if (s.ptsm_cycles < 0.0) ++n_ti;
    CHECK(r.n_ti == n_ti);
    CHECK(r.p_e_hat == doctest::Approx(static_cast<double>(n_ti) / cfg.n_bat));
    CHECK(r.p_f_hat == doctest::Approx(std::pow(cfg.p0, r.q - 1) * r.p_e_hat));
    CHECK(r.total_evaluations == cfg.n_bat + static_cast<long>(r.q - 1) * (cfg.n_bat - n_s));
    CHECK(r.actual_evaluations >= cfg.n_bat);
    CHECK(r.actual_evaluations <= r.total_evaluations);
    CHECK(retained_samples(r).size() == static_cast<size_t>(r.total_evaluations));
    CHECK(r.warnings.empty());
}

TEST_CASE("subsim collapses to direct classification when failure is common") {
    const InputModel model = make_standard_normal_model(2);
    const LimitState ls = make_linear_beta_limit_state(0.5);
    const SubSimConfig cfg = small_config(9, 100);

    const SubSimResult r = run_subsim(ls, model, cfg);
    CHECK(r.q == 1);
    CHECK(r.total_evaluations == 100);
    CHECK(r.actual_evaluations == 100);
    CHECK(r.p_f_hat == doctest::Approx(r.p_e_hat));
    CHECK(r.levels[0].seed_indices.empty());
    // Phi(-0.5) ~ 0.31; a batch of 100 should land in the right neighbourhood
    CHECK(r.p_f_hat > 0.15);
    CHECK(r.p_f_hat < 0.50);

    const LimitState all_fail = make_constant_limit_state(-1.0);
    const SubSimResult rf = run_subsim(all_fail, model, cfg);
    CHECK(rf.q == 1);
    CHECK(rf.p_f_hat == doctest::Approx(1.0));
    CHECK(rf.n_ti == 100);
}

TEST_CASE("subsim estimate agrees with the exact tail probability") {
    const InputModel model = make_standard_normal_model(3);
    const double beta = 2.0;
    const LimitState ls = make_linear_beta_limit_state(beta);
    const double exact = stats::norm_sf(beta);

    std::vector<double> estimates;
    for (std::uint64_t s = 1; s <= 30; ++s) {
        SubSimConfig cfg = small_config(s, 500);
        estimates.push_back(run_subsim(ls, model, cfg).p_f_hat);
    }
    const RepeatStats stats = repeated_run_statistics(estimates);
    CHECK(stats.zero_count == 0);
    CHECK(stats.mean == doctest::Approx(exact).epsilon(0.20));
    REQUIRE(stats.cov_defined);
    CHECK(stats.cov > 0.02);
    CHECK(stats.cov < 0.60);
}

TEST_CASE("subsim runs are deterministic and independent of the worker count") {
    const InputModel model = make_standard_normal_model(3);
    const LimitState ls = make_linear_beta_limit_state(2.0);
    const SubSimConfig cfg = small_config(42);

    const SubSimResult serial = run_subsim(ls, model, cfg, 1);
    const SubSimResult wide = run_subsim(ls, model, cfg, 4);
    CHECK(serial.p_f_hat == wide.p_f_hat);
    CHECK(serial.q == wide.q);
    CHECK(serial.actual_evaluations == wide.actual_evaluations);
    REQUIRE(serial.levels.size() == wide.levels.size());
    for (size_t l = 0; l < serial.levels.size(); ++l) {
        CHECK(serial.levels[l].threshold == wide.levels[l].threshold);
        CHECK(serial.levels[l].seed_indices == wide.levels[l].seed_indices);
        for (size_t i = 0; i < serial.levels[l].samples.size(); ++i)
            CHECK(serial.levels[l].samples[i].point.u == wide.levels[l].samples[i].point.u);
    }
}

TEST_CASE("direct monte carlo matches its analytic error model") {
    const InputModel model = make_standard_normal_model(2);
    const double beta = 1.0;
    const LimitState ls = make_linear_beta_limit_state(beta);
    const double exact = stats::norm_sf(beta);

    const DmcResult r = run_dmc(ls, model, 2000, 3, 1, true);
    CHECK(r.n == 2000);
    CHECK(static_cast<long>(r.samples.size()) == r.n);
    REQUIRE(r.cov_defined);
    CHECK(r.analytic_cov ==
          doctest::Approx(std::sqrt((1.0 - r.p_f_hat) / (2000.0 * r.p_f_hat))));
    // three analytic sigmas around the truth
    const double sigma = std::sqrt(exact * (1.0 - exact) / 2000.0);
    CHECK(std::abs(r.p_f_hat - exact) < 3.0 * sigma);
    long n_ti = 0;
    for (const MarginSample& s : r.samples)
        if (s.ptsm_cycles < 0.0) ++n_ti;
    CHECK(n_ti == r.n_ti);

    const DmcResult lean = run_dmc(ls, model, 50, 3);
    CHECK(lean.samples.empty());

    const DmcResult par = run_dmc(ls, model, 400, 5, 8, true);
    const DmcResult ser = run_dmc(ls, model, 400, 5, 1, true);
    CHECK(par.p_f_hat == ser.p_f_hat);
    for (size_t i = 0; i < 400; ++i) CHECK(par.samples[i].point.u == ser.samples[i].point.u);

    CHECK_THROWS_AS(run_dmc(ls, model, 0, 1), Error);

    const DmcResult none = run_dmc(make_constant_limit_state(1.0), model, 100, 1);
    CHECK(none.p_f_hat == 0.0);
    CHECK(!none.cov_defined);
}

TEST_CASE("level cap raises an error that carries the partial result") {
    const InputModel model = make_standard_normal_model(2);
    const LimitState stuck = make_constant_limit_state(1.0);
    SubSimConfig cfg = small_config(1, 50);
    cfg.max_levels = 3;

    try {
        run_subsim(stuck, model, cfg);
        FAIL("expected SubsimMaxLevels");
    } catch (const SubsimMaxLevels& e) {
        CHECK(doctest::String(e.what()) ==
              doctest::Contains("hit max_levels = 3 with a still-positive threshold"));
        const SubSimResult& p = e.partial();
        CHECK(p.q == 3);
        CHECK(p.levels.size() == 3);
        CHECK(p.n_ti == 0);
        CHECK(p.p_f_hat == 0.0);
        CHECK(p.total_evaluations == 50 + 2 * 45);
        for (const LevelRecord& rec : p.levels) CHECK(rec.threshold == doctest::Approx(1.0));
        // constant margins are one big atom; the run must have said so
        REQUIRE(p.warnings.size() == 2);
        CHECK(doctest::String(p.warnings[0].c_str()) ==
              doctest::Contains("degenerate ties"));
    }
}

TEST_CASE("repeated run statistics") {
    const RepeatStats s = repeated_run_statistics({1.0, 2.0, 3.0});
    CHECK(s.n_runs == 3);
    CHECK(s.mean == doctest::Approx(2.0));
    REQUIRE(s.cov_defined);
    CHECK(s.cov == doctest::Approx(0.5));
    CHECK(s.zero_count == 0);

    const RepeatStats z = repeated_run_statistics({0.0, 0.0});
    CHECK(z.mean == 0.0);
    CHECK(!z.cov_defined);
    CHECK(z.zero_count == 2);

    CHECK_THROWS_AS(repeated_run_statistics({1.0}), Error);
}
