#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ptsa {

enum class BusKind { slack, pv, pq };

struct BusSpec {
    int id = 0;
    BusKind kind = BusKind::pq;
    double base_voltage_magnitude = 1.0;  // per-unit, used as the initial guess
    double voltage_setpoint = 1.0;        // per-unit, pv/slack only
};

struct LineSpec {
    int from_bus = 0;
    int to_bus = 0;
    double series_resistance = 0.0;   // per-unit
    double series_reactance = 0.0;    // per-unit
    double shunt_susceptance = 0.0;   // per-unit, total line charging
    double tap_ratio = 1.0;           // from-side tap, 1.0 if none
    bool in_service = true;
};

struct GeneratorSpec {
    int bus = 0;
    double inertia_constant_H = 0.0;          // seconds on machine base
    double damping_D = 0.0;                   // pu torque per pu speed deviation
    double transient_reactance_xd_prime = 0;  // per-unit
    double mechanical_power = 0.0;            // pu dispatch on system base
    double mva_base = 100.0;
};

struct LoadSpec {
    int bus = 0;
    double base_active_power = 0.0;    // MW
    double base_reactive_power = 0.0;  // MVAr
};

struct WindFarmSpec {
    int bus = 0;
    double rated_power = 50.0;  // MW, farm aggregate
    double v_in = 3.0;          // m/s
    double v_out = 25.0;        // m/s
    double v_r = 11.4;          // m/s
    double P_r = 1.5;           // MW, single-unit rating
};

struct FaultScenario {
    int faulted_bus = 0;
    double fault_start_time = 0.1;  // seconds
    std::pair<int, int> tripped_line{0, 0};
    double nominal_frequency = 60.0;  // Hz
};

struct GridCase {
    std::vector<BusSpec> buses;
    std::vector<LineSpec> lines;
    std::vector<GeneratorSpec> generators;
    std::vector<LoadSpec> loads;
    std::vector<WindFarmSpec> wind_farms;
    FaultScenario fault;
    double system_mva_base = 100.0;

    /// Checks all structural invariants (single slack, contiguous ids,
    /// resolvable cross references, fault consistency). Throws Error.
    void validate() const;

    int bus_count() const { return static_cast<int>(buses.size()); }
    /// Dense index of a bus id (ids are 1-based and contiguous).
    int bus_index(int bus_id) const;

    static GridCase from_json(const nlohmann::json& j);
    static GridCase from_json_file(const std::string& path);
    nlohmann::json to_json() const;
};

enum class TopologyVariant { pre_fault, fault_on, post_fault };

struct AdmittanceMatrix {
    int dimension = 0;
    Eigen::MatrixXcd entries;
};

/// Admittance used to represent a bolted three-phase fault during fault-on.
inline constexpr double kFaultShuntAdmittance = 1e8;

/// Assemble the bus admittance matrix for the requested topology.
/// fault_on adds the bolted-fault shunt at the faulted bus; post_fault removes
/// the tripped line and fails with "islanded network" if that disconnects the grid.
AdmittanceMatrix build_ybus(const GridCase& grid, TopologyVariant variant);

/// Scenario overrides applied on top of the base case before the power flow.
struct ScenarioInjections {
    struct PQ {
        double p_mw = 0.0;
        double q_mvar = 0.0;
    };
    std::map<int, PQ> load_overrides;  // bus id -> replaces LoadSpec base values
    std::map<int, double> wind_mw;     // bus id -> injected active power, Q = 0
    bool load_clamped = false;         // a negative load scale was clamped to zero
};

struct PowerFlowSolution {
    Eigen::VectorXd voltage_magnitudes;  // per-unit, dense bus order
    Eigen::VectorXd voltage_angles;      // radians
    double slack_p_mw = 0.0;
    double slack_q_mvar = 0.0;
    bool converged = false;
    double max_mismatch = 0.0;  // per-unit
    int iterations = 0;
    Eigen::VectorXd gen_active_power;    // pu per generator, system base
    Eigen::VectorXd gen_reactive_power;  // pu per generator
};

struct PowerFlowOptions {
    double tolerance = 1e-8;  // pu, max absolute mismatch
    int max_iterations = 50;
};

/// Newton-Raphson power flow on the pre-fault network.
/// Throws PowerFlowDiverged when the iteration fails to converge.
PowerFlowSolution solve_power_flow(const GridCase& grid,
                                   const ScenarioInjections& injections = {},
                                   const PowerFlowOptions& options = {});

/// Classical-model equivalent: everything a swing simulation needs.
struct ReducedNetwork {
    AdmittanceMatrix pre_fault;   // generator internal nodes only
    AdmittanceMatrix fault_on;
    AdmittanceMatrix post_fault;
    Eigen::VectorXd internal_emf_magnitudes;  // per-unit
    Eigen::VectorXd initial_rotor_angles;     // radians
    Eigen::VectorXd mechanical_powers;        // pu on system base
    Eigen::VectorXd inertia_coefficients;     // 2H per generator, system base
    Eigen::VectorXd damping;                  // pu per generator
    double nominal_frequency = 60.0;

    int generator_count() const { return static_cast<int>(internal_emf_magnitudes.size()); }
    const AdmittanceMatrix& matrix(TopologyVariant v) const {
        switch (v) {
            case TopologyVariant::fault_on: return fault_on;
            case TopologyVariant::post_fault: return post_fault;
            default: return pre_fault;
        }
    }
};

/// Compute internal EMFs, convert loads and wind injections to constant shunt
/// admittances at the solved voltages, and Kron-reduce all three topology
/// variants to the generator internal nodes.
ReducedNetwork reduce_to_internal_nodes(const GridCase& grid, const PowerFlowSolution& pf,
                                        const ScenarioInjections& injections = {});

/// Kron reduction of an arbitrary admittance matrix: eliminate the listed
/// node indices, keeping the remaining ones in their original relative order.
/// Throws "degenerate network" when the eliminated sub-block is singular.
Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& full, const std::vector<int>& eliminate);

}  // namespace ptsa
