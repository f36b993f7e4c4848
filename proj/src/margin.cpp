#include "ptsa/margin.hpp"

#include <cmath>

#include "ptsa/errors.hpp"

namespace ptsa {

void MarginConfig::validate() const {
    if (!(cct_resolution_cycles > 0.0) || !(cct_resolution_cycles <= 1.0))
        throw Error(ErrorCode::invalid_argument, "cct resolution must lie in (0, 1] cycles");
    if (!(fct_cycles >= 0.0) || !(fct_cycles < cct_max_cycles))
        throw Error(ErrorCode::invalid_argument, "need 0 <= fct_cycles < cct_max_cycles");
    if (!(nominal_frequency > 0.0))
        throw Error(ErrorCode::invalid_argument, "nominal frequency must be positive");
    const double steps = cct_max_cycles / cct_resolution_cycles;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw Error(ErrorCode::invalid_argument,
                    "cct_max_cycles must be a multiple of the resolution");
}

CctResult compute_cct(const ReducedNetwork& network, const FaultScenario& fault,
                      const MarginConfig& cfg, const SimConfig& sim) {
    cfg.validate();
    CctResult result;

    auto stable_at = [&](long grid_point) {
        const double cycles = static_cast<double>(grid_point) * cfg.cct_resolution_cycles;
        const double seconds = cycles / cfg.nominal_frequency;
        ++result.simulate_calls;
        return simulate(network, fault, seconds, sim).verdict.stable;
    };

    const long top = std::lround(cfg.cct_max_cycles / cfg.cct_resolution_cycles);
    if (!stable_at(0)) {
        result.cct_cycles = 0.0;
        result.unstable_at_zero = true;
        return result;
    }
    if (stable_at(top)) {
        result.cct_cycles = cfg.cct_max_cycles;
        result.capped = true;
        return result;
    }

    long lo = 0, hi = top;  // stable at lo, unstable at hi
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (stable_at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.cct_cycles = static_cast<double>(lo) * cfg.cct_resolution_cycles;
    return result;
}

MarginSample evaluate_margin(const ScenarioPoint& point, const GridCase& grid,
                             const InputModel& model, const MarginConfig& cfg,
                             const SimConfig& sim) {
    cfg.validate();
    MarginSample out;
    out.point = point;
    try {
        const ScenarioInjections injections = assemble_scenario(point, model, grid);
        const PowerFlowSolution pf = solve_power_flow(grid, injections);
        const ReducedNetwork network = reduce_to_internal_nodes(grid, pf, injections);
        const CctResult cct = compute_cct(network, grid.fault, cfg, sim);
        out.cct_cycles = cct.cct_cycles;
        out.capped = cct.capped;
    } catch (const Error& e) {
        // divergent power flow or a degenerate reduction: no operating point,
        // treated as worst-case unstable to keep the limit state total
        if (e.code() != ErrorCode::numerical) throw;
        out.cct_cycles = 0.0;
        out.capped = false;
        out.power_flow_failed = true;
    }
    out.ptsm_cycles = out.cct_cycles - cfg.fct_cycles;
    return out;
}

}  // namespace ptsa
