#include "ptsa/swing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptsa/errors.hpp"
#include "ptsa/stats.hpp"

namespace ptsa {

void SimConfig::validate() const {
    if (!(time_step > 0.0) || !(horizon > 0.0) || !(instability_angle_threshold > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    "sim config: time step, horizon, and threshold must be positive");
}

SwingDerivatives swing_derivatives(const SwingState& state, const ReducedNetwork& network,
                                   TopologyVariant variant) {
    const int ng = network.generator_count();
    const Eigen::MatrixXcd& y = network.matrix(variant).entries;
    const Eigen::VectorXd& e = network.internal_emf_magnitudes;
    const double omega_s = 2.0 * stats::kPi * network.nominal_frequency;

    SwingDerivatives d;
    d.d_angles.resize(ng);
    d.d_speeds.resize(ng);
    for (int i = 0; i < ng; ++i) {
        double pe = 0.0;
        for (int j = 0; j < ng; ++j) {
            const double dij = state.rotor_angles[i] - state.rotor_angles[j];
            pe += e[i] * e[j] *
                  (y(i, j).real() * std::cos(dij) + y(i, j).imag() * std::sin(dij));
        }
        d.d_angles[i] = omega_s * state.rotor_speed_deviations[i];
        d.d_speeds[i] = (network.mechanical_powers[i] - pe -
                         network.damping[i] * state.rotor_speed_deviations[i]) /
                        network.inertia_coefficients[i];
    }
    return d;
}

namespace {

void rk4_step(SwingState& state, double dt, const ReducedNetwork& network,
              TopologyVariant variant) {
    const SwingDerivatives k1 = swing_derivatives(state, network, variant);
    SwingState s2{state.rotor_angles + 0.5 * dt * k1.d_angles,
                  state.rotor_speed_deviations + 0.5 * dt * k1.d_speeds, state.time + 0.5 * dt};
    const SwingDerivatives k2 = swing_derivatives(s2, network, variant);
    SwingState s3{state.rotor_angles + 0.5 * dt * k2.d_angles,
                  state.rotor_speed_deviations + 0.5 * dt * k2.d_speeds, state.time + 0.5 * dt};
    const SwingDerivatives k3 = swing_derivatives(s3, network, variant);
    SwingState s4{state.rotor_angles + dt * k3.d_angles,
                  state.rotor_speed_deviations + dt * k3.d_speeds, state.time + dt};
    const SwingDerivatives k4 = swing_derivatives(s4, network, variant);

    state.rotor_angles +=
        (dt / 6.0) * (k1.d_angles + 2.0 * k2.d_angles + 2.0 * k3.d_angles + k4.d_angles);
    state.rotor_speed_deviations +=
        (dt / 6.0) * (k1.d_speeds + 2.0 * k2.d_speeds + 2.0 * k3.d_speeds + k4.d_speeds);
    state.time += dt;
}

double angle_separation(const SwingState& state) {
    if (state.rotor_angles.size() < 2) return 0.0;
    return state.rotor_angles.maxCoeff() - state.rotor_angles.minCoeff();
}

struct OnlineClassifier {
    double threshold;
    StabilityVerdict verdict;

    // returns false once the trajectory is known unstable
    bool observe(const SwingState& state) {
        if (!state.rotor_angles.allFinite() || !state.rotor_speed_deviations.allFinite()) {
            verdict.stable = false;
            verdict.max_angle_separation = std::numeric_limits<double>::infinity();
            if (!verdict.first_violation_time) verdict.first_violation_time = state.time;
            return false;
        }
        const double sep = angle_separation(state);
        verdict.max_angle_separation = std::max(verdict.max_angle_separation, sep);
        if (sep > threshold) {
            verdict.stable = false;
            if (!verdict.first_violation_time) verdict.first_violation_time = state.time;
            return false;
        }
        return true;
    }
};

}  // namespace

SimResult simulate(const ReducedNetwork& network, const FaultScenario& fault,
                   double clearing_time_s, const SimConfig& cfg, bool record_trajectory) {
    cfg.validate();
    if (clearing_time_s < 0.0)
        throw Error(ErrorCode::invalid_argument, "clearing time must be non-negative");

    const int ng = network.generator_count();
    SwingState state{network.initial_rotor_angles, Eigen::VectorXd::Zero(ng), 0.0};

    SimResult result;
    OnlineClassifier classifier{cfg.instability_angle_threshold, {}};

    auto record = [&](const SwingState& s) {
        if (record_trajectory) result.trajectory.push_back(s);
    };
    record(state);
    bool keep_going = classifier.observe(state);

    const double t_fault = fault.fault_start_time;
    const double t_clear = t_fault + clearing_time_s;
    const double t_end = t_clear + cfg.horizon;

    struct Stage {
        double end;
        TopologyVariant variant;
    };
    const Stage stages[] = {{t_fault, TopologyVariant::pre_fault},
                            {t_clear, TopologyVariant::fault_on},
                            {t_end, TopologyVariant::post_fault}};

    for (const Stage& stage : stages) {
        if (!keep_going) break;
        const double start = state.time;
        if (stage.end <= start) continue;
        const double span = stage.end - start;
        const long full_steps = static_cast<long>(std::floor(span / cfg.time_step + 1e-9));
        const double remainder = span - static_cast<double>(full_steps) * cfg.time_step;
        for (long k = 0; k < full_steps && keep_going; ++k) {
            rk4_step(state, cfg.time_step, network, stage.variant);
            state.time = start + static_cast<double>(k + 1) * cfg.time_step;
            record(state);
            keep_going = classifier.observe(state);
        }
        if (keep_going && remainder > 1e-12) {
            rk4_step(state, remainder, network, stage.variant);
            state.time = stage.end;
            record(state);
            keep_going = classifier.observe(state);
        }
        if (keep_going) state.time = stage.end;  // land exactly on the switching instant
    }

    result.verdict = classifier.verdict;
    return result;
}

StabilityVerdict classify_stability(const std::vector<SwingState>& series, double threshold) {
    if (series.empty())
        throw Error(ErrorCode::invalid_argument, "cannot classify an empty trajectory");
    OnlineClassifier classifier{threshold, {}};
    for (const auto& s : series)
        if (!classifier.observe(s)) break;
    return classifier.verdict;
}

}  // namespace ptsa
