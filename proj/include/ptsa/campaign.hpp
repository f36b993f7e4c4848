#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptsa/margin.hpp"
#include "ptsa/swing.hpp"

namespace ptsa {

/// Everything a single invocation needs, normally assembled by the CLI.
struct CampaignSpec {
    std::string command;  // subsim | dmc | subsim-repeat | dmc-repeat |
                          // sensitivity | compensate | trajectory
    std::string case_path;
    std::string uncertainty_path;
    std::string limit_state = "power-system";  // | linear-beta | constant

    // analytic backends
    double beta = 3.29053;
    double constant_value = 1.0;
    int dimension = 5;

    // estimators
    double p0 = 0.1;
    int n_bat = 1000;
    double proposal_spread = 1.0;
    int max_levels = 10;
    long n = 3700;
    int runs = 100;
    std::uint64_t seed = 1;

    // margin and simulation
    double fct_cycles = 6.0;
    double cct_resolution_cycles = 0.5;
    double cct_max_cycles = 30.0;
    double dt = 0.0;  // 0 = quarter cycle of the case's nominal frequency
    double horizon = 5.0;
    double instability_angle_threshold = 2.0 * 3.14159265358979323846;

    // outputs and inputs on disk
    std::string out;
    bool write_store = true;
    std::string store_path;    // sensitivity / compensate input
    std::string summary_path;  // run metadata for sensitivity; default: next to the store

    // sensitivity / compensation
    int intervals_1d = 100;
    int intervals_2d = 20;
    int target_input = -1;  // -1 = every Gaussian input in turn
    double clamp_sigmas = 1.5;
    bool full_reevaluation = false;

    // trajectory
    std::vector<double> point_u;
    std::vector<double> point_x;
    double clearing_cycles = -1.0;  // <0 = fct_cycles

    int parallel = 0;  // 0 = hardware concurrency

    static CampaignSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

/// Execute the campaign, write its artifacts under spec.out (if set), and
/// return the summary document (also persisted as summary.json).
nlohmann::json run_campaign(const CampaignSpec& spec);

}  // namespace ptsa
