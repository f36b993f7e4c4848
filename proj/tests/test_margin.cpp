#include "doctest.h"

#include <cmath>
#include <memory>

#include "ptsa/errors.hpp"
#include "ptsa/limit_state.hpp"
#include "ptsa/margin.hpp"
#include "ptsa/rng.hpp"
#include "ptsa/swing.hpp"
#include "test_support.hpp"

using namespace ptsa;
using test_support::lossless_pair;
using test_support::pair_critical_clearing_s;
using test_support::pair_fault;

TEST_CASE("bisected critical clearing time matches the equal-area answer") {
    const double b12 = 2.0, h1 = 3.0, delta0 = 0.35;
    const ReducedNetwork net = lossless_pair(b12, h1, 1e6, delta0);
    const MarginConfig cfg;
    const SimConfig sim;

    const CctResult r = compute_cct(net, pair_fault(), cfg, sim);
    CHECK(!r.capped);
    CHECK(!r.unstable_at_zero);
    CHECK(r.simulate_calls <= 8);

    const double oracle_cycles = pair_critical_clearing_s(b12, h1, delta0) * 60.0;
    // oracle ~ 14.87 cycles; the half-cycle grid must land just below it
    CHECK(r.cct_cycles == doctest::Approx(14.5));
    CHECK(r.cct_cycles <= oracle_cycles);
    CHECK(oracle_cycles - r.cct_cycles < cfg.cct_resolution_cycles);

    // bracket property, re-verified with direct simulations
    const double f0 = cfg.nominal_frequency;
    CHECK(simulate(net, pair_fault(), r.cct_cycles / f0, sim).verdict.stable);
    CHECK(!simulate(net, pair_fault(), (r.cct_cycles + cfg.cct_resolution_cycles) / f0, sim)
               .verdict.stable);
}

TEST_CASE("deeply stable scenarios cap at the search limit") {
    // light loading: equal-area clearing time ~ 54 cycles, beyond the 30-cycle cap
    const ReducedNetwork net = lossless_pair(2.0, 3.0, 1e6, 0.05);
    REQUIRE(pair_critical_clearing_s(2.0, 3.0, 0.05) * 60.0 > 30.0);

    const CctResult r = compute_cct(net, pair_fault(), MarginConfig{}, SimConfig{});
    CHECK(r.capped);
    CHECK(r.cct_cycles == doctest::Approx(30.0));
    CHECK(!r.unstable_at_zero);
    CHECK(r.simulate_calls == 2);
}

TEST_CASE("overloaded machine is flagged as unstable even at instant clearing") {
    ReducedNetwork net = lossless_pair(2.0, 3.0, 1e6, 0.35);
    net.mechanical_powers << 3.0, -3.0;  // exceeds the 2.0 pu tie capacity

    const CctResult r = compute_cct(net, pair_fault(), MarginConfig{}, SimConfig{});
    CHECK(r.unstable_at_zero);
    CHECK(r.cct_cycles == doctest::Approx(0.0));
    CHECK(!r.capped);
    CHECK(r.simulate_calls == 1);
}

TEST_CASE("margin config validation") {
    MarginConfig cfg;
    cfg.cct_resolution_cycles = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("resolution"), Error);
    cfg = MarginConfig{};
    cfg.cct_resolution_cycles = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = MarginConfig{};
    cfg.fct_cycles = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = MarginConfig{};
    cfg.fct_cycles = 31.0;  // beyond the search cap
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = MarginConfig{};
    cfg.nominal_frequency = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = MarginConfig{};
    cfg.cct_max_cycles = 30.3;  // not a multiple of the half-cycle grid
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("multiple"), Error);
}

TEST_CASE("scenario margins of the bundled nine-bus case") {
    const GridCase grid = GridCase::from_json_file(test_support::kCasePath);
    const InputModel model = InputModel::from_json_file(test_support::kUncertaintyPath);
    const MarginConfig cfg;
    const SimConfig sim;

    ScenarioPoint median;
    median.u = Eigen::VectorXd::Zero(5);
    median.x = model.u_to_x(median.u);

    SUBCASE("median scenario") {
        const MarginSample m = evaluate_margin(median, grid, model, cfg, sim);
        CHECK(!m.power_flow_failed);
        CHECK(!m.capped);
        CHECK(m.cct_cycles == doctest::Approx(13.0));
        CHECK(m.ptsm_cycles == doctest::Approx(7.0));
    }

    SUBCASE("rated wind at both farms") {
        ScenarioPoint rated = median;
        rated.x[3] = 11.4;
        rated.x[4] = 11.4;
        const MarginSample m = evaluate_margin(rated, grid, model, cfg, sim);
        CHECK(!m.power_flow_failed);
        CHECK(m.cct_cycles == doctest::Approx(9.5));
        CHECK(m.ptsm_cycles == doctest::Approx(3.5));
    }

    SUBCASE("absurd loading falls back to the worst margin instead of throwing") {
        ScenarioPoint heavy = median;
        heavy.x[0] = 40.0;  // 5000 MW at bus 5; no power-flow solution exists
        const MarginSample m = evaluate_margin(heavy, grid, model, cfg, sim);
        CHECK(m.power_flow_failed);
        CHECK(m.cct_cycles == doctest::Approx(0.0));
        CHECK(m.ptsm_cycles == doctest::Approx(-cfg.fct_cycles));
    }

    SUBCASE("limit-state wrapper reproduces the margin") {
        const LimitState ls = make_power_system_limit_state(
            std::make_shared<GridCase>(grid), std::make_shared<InputModel>(model), cfg, sim);
        CHECK(ls(median) == evaluate_margin(median, grid, model, cfg, sim).ptsm_cycles);
    }

    SUBCASE("depressed bus-8 load with rated wind goes transiently unstable") {
        ScenarioPoint weak = median;
        weak.x[2] = 0.67;  // 67 MW at bus 8
        weak.x[3] = 11.4;
        weak.x[4] = 11.4;
        const MarginSample m = evaluate_margin(weak, grid, model, cfg, sim);
        CHECK(!m.power_flow_failed);
        CHECK(m.cct_cycles == doctest::Approx(4.5));
        CHECK(m.ptsm_cycles == doctest::Approx(-1.5));

        // restoring the load to the 1.5-sigma clamp level recovers the margin
        ScenarioPoint restored = weak;
        restored.x[2] = 0.85;
        const MarginSample r = evaluate_margin(restored, grid, model, cfg, sim);
        CHECK(r.cct_cycles == doctest::Approx(8.0));
        CHECK(r.ptsm_cycles == doctest::Approx(2.0));
        CHECK(r.ptsm_cycles > m.ptsm_cycles);
    }
}

TEST_CASE("a scenario stable at any clearing time is stable at instant clearing") {
    const GridCase grid = GridCase::from_json_file(test_support::kCasePath);
    const InputModel model = InputModel::from_json_file(test_support::kUncertaintyPath);
    const SimConfig sim;
    const double f0 = grid.fault.nominal_frequency;

    RngStream rng(1609);
    int stable_somewhere = 0;
    for (int k = 0; k < 12; ++k) {
        const ScenarioPoint pt = make_scenario(model, model.sample_u(rng));
        const ScenarioInjections inj = assemble_scenario(pt, model, grid);
        const ReducedNetwork net =
            reduce_to_internal_nodes(grid, solve_power_flow(grid, inj), inj);
        bool any_stable = false;
        for (const double cycles : {30.0, 12.0, 6.0, 3.0}) {
            if (simulate(net, grid.fault, cycles / f0, sim).verdict.stable) {
                any_stable = true;
                break;
            }
        }
        if (any_stable) {
            ++stable_somewhere;
            CHECK(simulate(net, grid.fault, 0.0, sim).verdict.stable);
        }
    }
    CHECK(stable_somewhere > 0);  // the property must actually be exercised
}

TEST_CASE("analytic limit states") {
    const LimitState g = make_linear_beta_limit_state(3.0);
    ScenarioPoint p;
    p.u = Eigen::VectorXd::Zero(4);
    p.x = p.u;
    CHECK(g(p) == doctest::Approx(3.0));
    p.u = Eigen::VectorXd::Ones(4);
    CHECK(g(p) == doctest::Approx(3.0 - 4.0 / 2.0));
    p.u << 1.0, -1.0, 2.0, -2.0;
    CHECK(g(p) == doctest::Approx(3.0));

    const LimitState c = make_constant_limit_state(-1.25);
    CHECK(c(p) == doctest::Approx(-1.25));
}

TEST_CASE("standard-normal substrate model is the identity transform") {
    const InputModel model = make_standard_normal_model(3);
    CHECK(model.dimension() == 3);
    CHECK(model.copula_pairs().empty());
    Eigen::VectorXd u(3);
    u << 0.3, -1.7, 2.5;
    const Eigen::VectorXd x = model.u_to_x(u);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(u[i]));
    const Eigen::VectorXd back = model.x_to_u(x);
    for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(u[i]));
    CHECK(model.marginals()[0].name == "u1");
    CHECK(model.marginals()[2].name == "u3");
}

TEST_CASE("guard clauses of the power-system limit-state factory") {
    const MarginConfig cfg;
    const SimConfig sim;
    CHECK_THROWS_WITH_AS(make_power_system_limit_state(nullptr, nullptr, cfg, sim),
                         doctest::Contains("needs a case"), Error);
}
