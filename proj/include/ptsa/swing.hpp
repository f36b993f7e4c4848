#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ptsa/grid.hpp"

namespace ptsa {

struct SwingState {
    Eigen::VectorXd rotor_angles;            // radians
    Eigen::VectorXd rotor_speed_deviations;  // per-unit
    double time = 0.0;                       // seconds
};

struct SwingDerivatives {
    Eigen::VectorXd d_angles;  // rad/s
    Eigen::VectorXd d_speeds;  // per-unit per second
};

struct SimConfig {
    double time_step = 1.0 / 240.0;  // quarter cycle at 60 Hz
    double horizon = 5.0;            // seconds after fault clearing
    double instability_angle_threshold = 2.0 * 3.14159265358979323846;  // one full pole slip

    void validate() const;
};

struct StabilityVerdict {
    bool stable = true;
    double max_angle_separation = 0.0;  // radians
    std::optional<double> first_violation_time;  // seconds
};

/// Right-hand side of the classical swing equations for one topology variant.
SwingDerivatives swing_derivatives(const SwingState& state, const ReducedNetwork& network,
                                   TopologyVariant variant);

struct SimResult {
    StabilityVerdict verdict;
    std::vector<SwingState> trajectory;  // filled only when recording is requested
};

/// Integrate through pre-fault, fault-on, and post-fault stages with fixed-step
/// RK4. Stage boundaries are hit exactly (the last step of a stage is shortened
/// when needed). Integration stops early at the first threshold violation;
/// a non-finite state counts as unstable.
SimResult simulate(const ReducedNetwork& network, const FaultScenario& fault,
                   double clearing_time_s, const SimConfig& cfg, bool record_trajectory = false);

/// Offline classification of a recorded state series.
StabilityVerdict classify_stability(const std::vector<SwingState>& series, double threshold);

}  // namespace ptsa
