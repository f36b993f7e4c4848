// Command-line front end for the transient-stability assessment library.
// All estimation work happens behind the C API in libptsa; this file only
// translates flags into a campaign spec and prints the summary JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "ptsa/ptsa.h"

namespace {

using nlohmann::json;

// Holds every settable value once; each subcommand registers the subset it
// understands.  Only flags the user actually passed end up in the spec, so
// library defaults stay in one place.
struct Options {
    std::string case_path;
    std::string uncertainty_path;
    std::string limit_state;
    double beta = 0.0;
    double constant_value = 0.0;
    int dimension = 0;
    double p0 = 0.0;
    int n_bat = 0;
    double proposal_spread = 0.0;
    int max_levels = 0;
    int n = 0;
    int runs = 0;
    long long seed = 0;
    double fct_cycles = 0.0;
    double cct_resolution_cycles = 0.0;
    double cct_max_cycles = 0.0;
    double dt = 0.0;
    double horizon = 0.0;
    double angle_threshold = 0.0;
    std::string out;
    bool no_store = false;
    std::string store_path;
    std::string summary_path;
    int intervals_1d = 0;
    int intervals_2d = 0;
    int target_input = 0;
    double clamp_sigmas = 0.0;
    bool full_reevaluation = false;
    std::vector<double> point_u;
    std::vector<double> point_x;
    double clearing_cycles = 0.0;
    int parallel = 0;
};

struct Binding {
    CLI::Option* opt;
    std::function<void(json&)> apply;
};

struct SubCmd {
    CLI::App* app = nullptr;
    std::string command;
    std::vector<Binding> bindings;

    template <typename T>
    CLI::Option* option(const std::string& flag, T& slot, const std::string& key,
                        const std::string& desc) {
        CLI::Option* o = app->add_option(flag, slot, desc);
        bindings.push_back({o, [&slot, key](json& spec) { spec[key] = slot; }});
        return o;
    }

    void flag(const std::string& name, bool& slot, const std::string& key, bool stored_value,
              const std::string& desc) {
        CLI::Option* o = app->add_flag(name, slot, desc);
        bindings.push_back({o, [&slot, key, stored_value](json& spec) {
                                if (slot) spec[key] = stored_value;
                            }});
    }

    json build_spec() const {
        json spec;
        spec["command"] = command;
        for (const auto& b : bindings)
            if (b.opt->count() > 0) b.apply(spec);
        return spec;
    }
};

void add_backend_options(SubCmd& c, Options& o) {
    c.option("--case", o.case_path, "case", "grid case JSON file");
    c.option("--uncertainty", o.uncertainty_path, "uncertainty", "uncertain-input model JSON file");
    c.option("--limit-state", o.limit_state, "limit_state",
             "margin backend: power-system, linear-beta, or constant");
    c.option("--beta", o.beta, "beta", "reliability index for the linear-beta backend");
    c.option("--constant-value", o.constant_value, "constant_value",
             "fixed margin for the constant backend");
    c.option("--dimension", o.dimension, "dimension",
             "input dimension for analytic backends");
    c.option("--fct-cycles", o.fct_cycles, "fct_cycles", "fault clearing time in cycles");
    c.option("--cct-resolution-cycles", o.cct_resolution_cycles, "cct_resolution_cycles",
             "CCT search grid step in cycles");
    c.option("--cct-max-cycles", o.cct_max_cycles, "cct_max_cycles", "CCT search upper bound");
    c.option("--dt", o.dt, "dt", "integration step in seconds (default: quarter cycle)");
    c.option("--horizon", o.horizon, "horizon", "post-clearing simulation horizon in seconds");
    c.option("--angle-threshold", o.angle_threshold, "instability_angle_threshold",
             "rotor-angle separation declaring instability, radians");
}

void add_common_options(SubCmd& c, Options& o) {
    c.option("--seed", o.seed, "seed", "master RNG seed");
    c.option("--out", o.out, "out", "output directory");
    c.option("--parallel", o.parallel, "parallel",
             "worker threads (0 = hardware concurrency)");
}

void add_subsim_options(SubCmd& c, Options& o) {
    c.option("--p0", o.p0, "p0", "conditional level probability");
    c.option("--n-bat", o.n_bat, "n_bat", "samples per level");
    c.option("--proposal-spread", o.proposal_spread, "proposal_spread",
             "component-wise proposal standard deviation");
    c.option("--max-levels", o.max_levels, "max_levels", "abort after this many levels");
}

int run_spec(const json& spec, const std::string& out_dir) {
    char* summary = nullptr;
    const ptsa_status status = ptsa_campaign_run(spec.dump().c_str(), &summary);
    if (status == PTSA_OK) {
        std::printf("%s\n", summary);
        ptsa_string_free(summary);
        return 0;
    }
    json err;
    err["error"]["status"] = static_cast<int>(status);
    err["error"]["name"] = ptsa_status_name(status);
    err["error"]["message"] = ptsa_last_error();
    std::fprintf(stderr, "%s\n", err.dump(2).c_str());
    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        std::ofstream f(std::filesystem::path(out_dir) / "error.json");
        if (f) f << err.dump(2) << '\n';
    }
    ptsa_string_free(summary);
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic transient stability assessment toolkit"};
    app.require_subcommand(1);
    Options o;
    std::vector<SubCmd> cmds;
    cmds.reserve(8);

    auto make = [&](const std::string& name, const std::string& desc) -> SubCmd& {
        cmds.push_back(SubCmd{});
        SubCmd& c = cmds.back();
        c.app = app.add_subcommand(name, desc);
        c.command = name;
        add_common_options(c, o);
        return c;
    };

    {
        SubCmd& c = make("subsim", "estimate the instability probability by subset simulation");
        add_backend_options(c, o);
        add_subsim_options(c, o);
        c.flag("--no-store", o.no_store, "write_store", false,
               "skip writing the sample store");
        c.option("--store", o.store_path, "store", "sample store path override");
        c.option("--intervals-1d", o.intervals_1d, "intervals_1d",
                 "percentile intervals per input for the inline sensitivity report");
        c.option("--intervals-2d", o.intervals_2d, "intervals_2d",
                 "percentile intervals per axis for correlated pairs");
    }
    {
        SubCmd& c = make("dmc", "estimate the instability probability by direct Monte Carlo");
        add_backend_options(c, o);
        c.option("--n", o.n, "n", "number of samples");
        c.flag("--no-store", o.no_store, "write_store", false,
               "skip writing the sample store");
        c.option("--store", o.store_path, "store", "sample store path override");
    }
    {
        SubCmd& c = make("subsim-repeat", "repeat subset simulation and report estimator spread");
        add_backend_options(c, o);
        add_subsim_options(c, o);
        c.option("--runs", o.runs, "runs", "number of independent repetitions");
    }
    {
        SubCmd& c = make("dmc-repeat", "repeat direct Monte Carlo and report estimator spread");
        add_backend_options(c, o);
        c.option("--n", o.n, "n", "number of samples per run");
        c.option("--runs", o.runs, "runs", "number of independent repetitions");
    }
    {
        SubCmd& c = make("sensitivity", "distance-based sensitivity analysis of a sample store");
        c.option("--store", o.store_path, "store", "sample store written by subsim")->required();
        c.option("--summary", o.summary_path, "summary",
                 "summary JSON of the run that produced the store");
        c.option("--uncertainty", o.uncertainty_path, "uncertainty",
                 "uncertain-input model JSON file");
        c.option("--intervals-1d", o.intervals_1d, "intervals_1d",
                 "percentile intervals per input");
        c.option("--intervals-2d", o.intervals_2d, "intervals_2d",
                 "percentile intervals per axis for correlated pairs");
    }
    {
        SubCmd& c = make("compensate", "test load compensation by clamping inputs in a store");
        add_backend_options(c, o);
        c.option("--store", o.store_path, "store", "sample store to re-evaluate")->required();
        c.option("--target-input", o.target_input, "target_input",
                 "input index to clamp (default: every Gaussian input)");
        c.option("--clamp-sigmas", o.clamp_sigmas, "clamp_sigmas",
                 "clamp level in standard deviations below the mean");
        c.flag("--full-reevaluation", o.full_reevaluation, "full_reevaluation", true,
               "re-evaluate every clamped sample, not just the unstable ones");
    }
    {
        SubCmd& c = make("trajectory", "simulate one scenario and write the rotor trajectories");
        add_backend_options(c, o);
        c.option("--point-u", o.point_u, "point_u",
                 "scenario in standard-normal coordinates");
        c.option("--point-x", o.point_x, "point_x", "scenario in physical coordinates");
        c.option("--clearing-cycles", o.clearing_cycles, "clearing_cycles",
                 "clearing time in cycles (default: the fault clearing time)");
    }

    CLI11_PARSE(app, argc, argv);

    for (const SubCmd& c : cmds)
        if (c.app->parsed()) return run_spec(c.build_spec(), o.out);
    return 1;
}
