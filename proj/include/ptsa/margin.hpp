#pragma once

#include "ptsa/grid.hpp"
#include "ptsa/inputs.hpp"
#include "ptsa/swing.hpp"

namespace ptsa {

struct MarginConfig {
    double fct_cycles = 6.0;            // actual fault clearing time
    double cct_resolution_cycles = 0.5;
    double cct_max_cycles = 30.0;       // search cap; capped samples are deeply stable
    double nominal_frequency = 60.0;    // Hz, converts cycles to seconds

    void validate() const;
};

struct CctResult {
    double cct_cycles = 0.0;
    bool capped = false;            // stable all the way to cct_max_cycles
    bool unstable_at_zero = false;  // degenerate: even instant clearing diverges
    int simulate_calls = 0;
};

/// Largest grid point t (multiples of cct_resolution_cycles) with a stable
/// trajectory at t and an unstable one at t + resolution, found by bisection.
CctResult compute_cct(const ReducedNetwork& network, const FaultScenario& fault,
                      const MarginConfig& cfg, const SimConfig& sim);

struct MarginSample {
    ScenarioPoint point;
    double cct_cycles = 0.0;
    double ptsm_cycles = 0.0;  // cct_cycles - fct_cycles
    bool capped = false;
    bool power_flow_failed = false;  // scenario had no usable operating point
};

/// Full scenario evaluation: injections, power flow, reduction, CCT, margin.
/// A scenario whose power flow diverges (or whose reduction degenerates) gets
/// the worst margin -fct_cycles so the limit state stays total.
MarginSample evaluate_margin(const ScenarioPoint& point, const GridCase& grid,
                             const InputModel& model, const MarginConfig& cfg,
                             const SimConfig& sim);

}  // namespace ptsa
