#include "ptsa/campaign.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include <nlohmann/json.hpp>

#include "ptsa/errors.hpp"
#include "ptsa/json_util.hpp"
#include "ptsa/limit_state.hpp"
#include "ptsa/parallel.hpp"
#include "ptsa/sensitivity.hpp"
#include "ptsa/stats.hpp"
#include "ptsa/store.hpp"
#include "ptsa/subsim.hpp"

namespace ptsa {

namespace fs = std::filesystem;

CampaignSpec CampaignSpec::from_json(const nlohmann::json& j) {
    try {
        CampaignSpec s;
        s.command = j.at("command").get<std::string>();
        s.case_path = j.value("case", std::string{});
        s.uncertainty_path = j.value("uncertainty", std::string{});
        s.limit_state = j.value("limit_state", std::string{"power-system"});
        s.beta = j.value("beta", s.beta);
        s.constant_value = j.value("constant_value", s.constant_value);
        s.dimension = j.value("dimension", s.dimension);
        s.p0 = j.value("p0", s.p0);
        s.n_bat = j.value("n_bat", s.n_bat);
        s.proposal_spread = j.value("proposal_spread", s.proposal_spread);
        s.max_levels = j.value("max_levels", s.max_levels);
        s.n = j.value("n", s.n);
        s.runs = j.value("runs", s.runs);
        s.seed = j.value("seed", s.seed);
        s.fct_cycles = j.value("fct_cycles", s.fct_cycles);
        s.cct_resolution_cycles = j.value("cct_resolution_cycles", s.cct_resolution_cycles);
        s.cct_max_cycles = j.value("cct_max_cycles", s.cct_max_cycles);
        s.dt = j.value("dt", s.dt);
        s.horizon = j.value("horizon", s.horizon);
        s.instability_angle_threshold =
            j.value("instability_angle_threshold", s.instability_angle_threshold);
        s.out = j.value("out", std::string{});
        s.write_store = j.value("write_store", s.write_store);
        s.store_path = j.value("store", std::string{});
        s.summary_path = j.value("summary", std::string{});
        s.intervals_1d = j.value("intervals_1d", s.intervals_1d);
        s.intervals_2d = j.value("intervals_2d", s.intervals_2d);
        s.target_input = j.value("target_input", s.target_input);
        s.clamp_sigmas = j.value("clamp_sigmas", s.clamp_sigmas);
        s.full_reevaluation = j.value("full_reevaluation", s.full_reevaluation);
        s.point_u = j.value("point_u", std::vector<double>{});
        s.point_x = j.value("point_x", std::vector<double>{});
        s.clearing_cycles = j.value("clearing_cycles", s.clearing_cycles);
        s.parallel = j.value("parallel", s.parallel);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("campaign spec: ") + e.what());
    }
}

nlohmann::json CampaignSpec::to_json() const {
    return nlohmann::json{{"command", command},
                          {"case", case_path},
                          {"uncertainty", uncertainty_path},
                          {"limit_state", limit_state},
                          {"beta", beta},
                          {"constant_value", constant_value},
                          {"dimension", dimension},
                          {"p0", p0},
                          {"n_bat", n_bat},
                          {"proposal_spread", proposal_spread},
                          {"max_levels", max_levels},
                          {"n", n},
                          {"runs", runs},
                          {"seed", seed},
                          {"fct_cycles", fct_cycles},
                          {"cct_resolution_cycles", cct_resolution_cycles},
                          {"cct_max_cycles", cct_max_cycles},
                          {"dt", dt},
                          {"horizon", horizon},
                          {"instability_angle_threshold", instability_angle_threshold},
                          {"out", out},
                          {"write_store", write_store},
                          {"store", store_path},
                          {"summary", summary_path},
                          {"intervals_1d", intervals_1d},
                          {"intervals_2d", intervals_2d},
                          {"target_input", target_input},
                          {"clamp_sigmas", clamp_sigmas},
                          {"full_reevaluation", full_reevaluation},
                          {"point_u", point_u},
                          {"point_x", point_x},
                          {"clearing_cycles", clearing_cycles},
                          {"parallel", parallel}};
}

void CampaignSpec::validate() const {
    static const std::set<std::string> commands{"subsim",      "dmc",        "subsim-repeat",
                                               "dmc-repeat",  "sensitivity", "compensate",
                                               "trajectory"};
    if (!commands.count(command))
        throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
    static const std::set<std::string> backends{"power-system", "linear-beta", "constant"};
    if (!backends.count(limit_state))
        throw Error(ErrorCode::invalid_argument, "unknown limit state '" + limit_state + "'");
    if (runs < 1) throw Error(ErrorCode::invalid_argument, "runs must be at least 1");
    if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be at least 1");
    if (dimension < 1) throw Error(ErrorCode::invalid_argument, "dimension must be at least 1");
    if (command == "sensitivity" || command == "compensate") {
        if (store_path.empty())
            throw Error(ErrorCode::invalid_argument, command + " needs an input store");
    }
    if (limit_state == "power-system" && command != "sensitivity") {
        if (case_path.empty() || uncertainty_path.empty())
            throw Error(ErrorCode::invalid_argument,
                        "the power-system limit state needs case and uncertainty files");
    }
}

namespace {

struct Backend {
    LimitState limit_state;
    std::shared_ptr<const GridCase> grid;       // power-system only
    std::shared_ptr<const InputModel> model;
    MarginConfig margin;
    SimConfig sim;
};

Backend make_backend(const CampaignSpec& spec, bool need_limit_state = true) {
    Backend b;
    if (spec.limit_state == "power-system") {
        b.grid = std::make_shared<const GridCase>(GridCase::from_json_file(spec.case_path));
        b.model =
            std::make_shared<const InputModel>(InputModel::from_json_file(spec.uncertainty_path));
        b.margin.fct_cycles = spec.fct_cycles;
        b.margin.cct_resolution_cycles = spec.cct_resolution_cycles;
        b.margin.cct_max_cycles = spec.cct_max_cycles;
        b.margin.nominal_frequency = b.grid->fault.nominal_frequency;
        b.sim.time_step =
            spec.dt > 0.0 ? spec.dt : 1.0 / (4.0 * b.grid->fault.nominal_frequency);
        b.sim.horizon = spec.horizon;
        b.sim.instability_angle_threshold = spec.instability_angle_threshold;
        if (need_limit_state)
            b.limit_state = make_power_system_limit_state(b.grid, b.model, b.margin, b.sim);
    } else {
        b.model = std::make_shared<const InputModel>(make_standard_normal_model(spec.dimension));
        if (spec.limit_state == "linear-beta") {
            b.limit_state = make_linear_beta_limit_state(spec.beta);
        } else {
            b.limit_state = make_constant_limit_state(spec.constant_value);
        }
    }
    return b;
}

std::string out_file(const CampaignSpec& spec, const std::string& name) {
    return (fs::path(spec.out) / name).string();
}

// store.jsonl lands in the output directory unless an explicit path overrides it
std::string store_target(const CampaignSpec& spec) {
    if (!spec.store_path.empty()) return spec.store_path;
    if (!spec.out.empty()) return out_file(spec, "store.jsonl");
    return {};
}

void write_summary(const CampaignSpec& spec, const nlohmann::json& summary) {
    if (spec.out.empty()) return;
    save_json_file(out_file(spec, "summary.json"), summary);
}

nlohmann::json base_summary(const CampaignSpec& spec) {
    return nlohmann::json{{"schema_version", 1},
                          {"command", spec.command},
                          {"limit_state", spec.limit_state},
                          {"seed", spec.seed}};
}

void append_number(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

nlohmann::json sensitivity_block(const TvdReport& report) {
    nlohmann::json etas = nlohmann::json::array();
    for (const InputTvd& entry : report.entries)
        etas.push_back({{"name", entry.name}, {"inputs", entry.inputs}, {"eta", entry.eta}});
    return etas;
}

// Inline analysis after a subsim run; failures downgrade to a warning so the
// estimate itself still lands on disk.
void run_inline_sensitivity(const CampaignSpec& spec, const Backend& backend,
                            const SubSimResult& result, nlohmann::json& summary) {
    try {
        const BinPartition partition = BinPartition::from_subsim(result);
        const std::vector<MarginSample> retained = retained_samples(result);
        SensitivityConfig cfg;
        cfg.intervals_1d = spec.intervals_1d;
        cfg.intervals_2d = spec.intervals_2d;
        const TvdReport report = analyze_sensitivity(retained, partition, *backend.model, cfg);
        summary["sensitivity"] = sensitivity_block(report);
        if (!spec.out.empty()) {
            save_json_file(out_file(spec, "tvd.json"), report.to_json());
            report.write_csv(out_file(spec, "intervals.csv"));
        }
    } catch (const Error& e) {
        summary["warnings"].push_back(std::string("sensitivity skipped: ") + e.what());
    }
}

nlohmann::json run_subsim_command(const CampaignSpec& spec, const Backend& backend,
                                  int degree) {
    SubSimConfig cfg;
    cfg.p0 = spec.p0;
    cfg.n_bat = spec.n_bat;
    cfg.proposal_spread = spec.proposal_spread;
    cfg.max_levels = spec.max_levels;
    cfg.seed = spec.seed;
    const SubSimResult result = run_subsim(backend.limit_state, *backend.model, cfg, degree);

    nlohmann::json summary = base_summary(spec);
    summary["p0"] = cfg.p0;
    summary["n_bat"] = cfg.n_bat;
    summary["proposal_spread"] = cfg.proposal_spread;
    summary["p_f_hat"] = result.p_f_hat;
    summary["q"] = result.q;
    summary["p_e_hat"] = result.p_e_hat;
    summary["n_ti"] = result.n_ti;
    summary["total_evaluations"] = result.total_evaluations;
    summary["actual_evaluations"] = result.actual_evaluations;
    nlohmann::json thresholds = nlohmann::json::array();
    for (const LevelRecord& rec : result.levels) thresholds.push_back(rec.threshold);
    summary["level_thresholds"] = std::move(thresholds);
    summary["warnings"] = result.warnings;

    const std::string store = store_target(spec);
    if (spec.write_store && !store.empty()) {
        const std::string run_id = "subsim-" + std::to_string(spec.seed);
        write_store_jsonl(store, store_rows_from_subsim(result, run_id));
    }
    run_inline_sensitivity(spec, backend, result, summary);
    return summary;
}

nlohmann::json run_dmc_command(const CampaignSpec& spec, const Backend& backend, int degree) {
    const std::string store = store_target(spec);
    const bool keep = spec.write_store && !store.empty();
    const DmcResult result =
        run_dmc(backend.limit_state, *backend.model, spec.n, spec.seed, degree, keep);

    nlohmann::json summary = base_summary(spec);
    summary["n"] = result.n;
    summary["p_f_hat"] = result.p_f_hat;
    summary["n_ti"] = result.n_ti;
    summary["total_evaluations"] = result.n;
    if (result.cov_defined) {
        summary["analytic_cov"] = result.analytic_cov;
    } else {
        summary["analytic_cov"] = nullptr;
    }
    summary["warnings"] = nlohmann::json::array();

    if (keep) {
        const std::string run_id = "dmc-" + std::to_string(spec.seed);
        write_store_jsonl(store, store_rows_from_dmc(result, run_id));
    }
    return summary;
}

nlohmann::json run_repeat_command(const CampaignSpec& spec, const Backend& backend,
                                  int degree) {
    const bool subsim_mode = spec.command == "subsim-repeat";
    std::vector<double> estimates;
    estimates.reserve(static_cast<size_t>(spec.runs));

    std::string csv;
    csv = subsim_mode
              ? "run,seed,p_f_hat,q,p_e_hat,n_ti,total_evaluations,actual_evaluations\n"
              : "run,seed,p_f_hat,n,n_ti\n";

    for (int r = 0; r < spec.runs; ++r) {
        const std::uint64_t run_seed =
            derive_seed(spec.seed, {rng_tag::run, static_cast<std::uint64_t>(r)});
        std::string line = std::to_string(r) + "," + std::to_string(run_seed) + ",";
        if (subsim_mode) {
            SubSimConfig cfg;
            cfg.p0 = spec.p0;
            cfg.n_bat = spec.n_bat;
            cfg.proposal_spread = spec.proposal_spread;
            cfg.max_levels = spec.max_levels;
            cfg.seed = run_seed;
            const SubSimResult result =
                run_subsim(backend.limit_state, *backend.model, cfg, degree);
            estimates.push_back(result.p_f_hat);
            append_number(line, result.p_f_hat);
            line += "," + std::to_string(result.q) + ",";
            append_number(line, result.p_e_hat);
            line += "," + std::to_string(result.n_ti) + "," +
                    std::to_string(result.total_evaluations) + "," +
                    std::to_string(result.actual_evaluations);
        } else {
            const DmcResult result =
                run_dmc(backend.limit_state, *backend.model, spec.n, run_seed, degree, false);
            estimates.push_back(result.p_f_hat);
            append_number(line, result.p_f_hat);
            line += "," + std::to_string(result.n) + "," + std::to_string(result.n_ti);
        }
        csv += line + "\n";
    }

    nlohmann::json summary = base_summary(spec);
    summary["runs"] = spec.runs;
    if (subsim_mode) {
        summary["p0"] = spec.p0;
        summary["n_bat"] = spec.n_bat;
    } else {
        summary["n"] = spec.n;
    }
    const RepeatStats stats = spec.runs >= 2
                                  ? repeated_run_statistics(estimates)
                                  : RepeatStats{estimates.front(), 0.0, false,
                                                estimates.front() == 0.0 ? 1 : 0, 1};
    summary["mean_p_f"] = stats.mean;
    if (stats.cov_defined) {
        summary["cov"] = stats.cov;
    } else {
        summary["cov"] = nullptr;
    }
    summary["zero_count"] = stats.zero_count;
    summary["warnings"] = nlohmann::json::array();

    if (!spec.out.empty()) {
        std::ofstream out(out_file(spec, "runs.csv"));
        if (!out) throw Error(ErrorCode::io, "cannot open runs.csv for writing");
        out << csv;
        if (!out) throw Error(ErrorCode::io, "write to runs.csv failed");
    }
    return summary;
}

BinPartition partition_from_summary(const nlohmann::json& run_summary) {
    try {
        const int q = run_summary.at("q").get<int>();
        const double p0 = run_summary.at("p0").get<double>();
        const double p_e_hat = run_summary.at("p_e_hat").get<double>();
        std::vector<double> thresholds =
            run_summary.at("level_thresholds").get<std::vector<double>>();
        if (static_cast<int>(thresholds.size()) < q - 1)
            throw Error(ErrorCode::parse, "run summary holds too few level thresholds");
        thresholds.resize(static_cast<size_t>(q - 1));
        return BinPartition::make(q, p0, p_e_hat, std::move(thresholds));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("run summary: ") + e.what());
    }
}

std::shared_ptr<const InputModel> model_for_store(const CampaignSpec& spec,
                                                 const std::vector<StoredSample>& rows) {
    if (!spec.uncertainty_path.empty())
        return std::make_shared<const InputModel>(
            InputModel::from_json_file(spec.uncertainty_path));
    if (rows.empty()) throw Error(ErrorCode::invalid_argument, "store is empty");
    return std::make_shared<const InputModel>(
        make_standard_normal_model(static_cast<int>(rows.front().u.size())));
}

nlohmann::json run_sensitivity_command(const CampaignSpec& spec) {
    const std::vector<StoredSample> rows = read_store_jsonl(spec.store_path);
    const std::string summary_path =
        spec.summary_path.empty()
            ? (fs::path(spec.store_path).parent_path() / "summary.json").string()
            : spec.summary_path;
    const BinPartition partition = partition_from_summary(load_json_file(summary_path));
    const std::shared_ptr<const InputModel> model = model_for_store(spec, rows);

    const std::vector<MarginSample> samples = samples_from_rows(retained_rows(rows));
    SensitivityConfig cfg;
    cfg.intervals_1d = spec.intervals_1d;
    cfg.intervals_2d = spec.intervals_2d;
    const TvdReport report = analyze_sensitivity(samples, partition, *model, cfg);

    nlohmann::json summary = base_summary(spec);
    summary["store"] = spec.store_path;
    summary["retained_samples"] = samples.size();
    summary["sensitivity"] = sensitivity_block(report);
    summary["warnings"] = nlohmann::json::array();
    if (!spec.out.empty()) {
        save_json_file(out_file(spec, "tvd.json"), report.to_json());
        report.write_csv(out_file(spec, "intervals.csv"));
    }
    return summary;
}

nlohmann::json run_compensate_command(const CampaignSpec& spec, int degree) {
    const std::vector<StoredSample> rows = read_store_jsonl(spec.store_path);
    const std::shared_ptr<const InputModel> model = model_for_store(spec, rows);
    Backend backend;
    if (spec.limit_state == "power-system") {
        backend = make_backend(spec);
    } else {
        backend.model = model;
        backend.limit_state = spec.limit_state == "linear-beta"
                                  ? make_linear_beta_limit_state(spec.beta)
                                  : make_constant_limit_state(spec.constant_value);
    }
    const std::vector<MarginSample> samples = samples_from_rows(rows);

    std::vector<int> targets;
    if (spec.target_input >= 0) {
        targets.push_back(spec.target_input);
    } else {
        for (int i = 0; i < model->dimension(); ++i)
            if (model->marginals()[static_cast<size_t>(i)].kind == MarginalKind::gaussian)
                targets.push_back(i);
    }
    if (targets.empty())
        throw Error(ErrorCode::invalid_argument, "no Gaussian inputs to compensate");

    nlohmann::json results = nlohmann::json::array();
    for (int target : targets) {
        const CompensationResult r =
            compensation_test(samples, target, spec.clamp_sigmas, backend.limit_state, *model,
                              degree, spec.full_reevaluation);
        nlohmann::json jr{{"input", r.target_index},
                          {"name", r.target_name},
                          {"clamp_value", r.clamp_value},
                          {"n_ti_before", r.n_ti_before},
                          {"n_ti_after", r.n_ti_after},
                          {"n_clamped", r.n_clamped},
                          {"removal_fraction",
                           r.n_ti_before > 0
                               ? 1.0 - static_cast<double>(r.n_ti_after) /
                                           static_cast<double>(r.n_ti_before)
                               : 0.0}};
        if (r.full_reevaluation) jr["n_ti_after_full"] = r.n_ti_after_full;
        results.push_back(std::move(jr));
    }

    nlohmann::json summary = base_summary(spec);
    summary["store"] = spec.store_path;
    summary["clamp_sigmas"] = spec.clamp_sigmas;
    summary["full_reevaluation"] = spec.full_reevaluation;
    summary["results"] = results;
    summary["warnings"] = nlohmann::json::array();
    if (!spec.out.empty()) {
        save_json_file(out_file(spec, "compensation.json"),
                       nlohmann::json{{"schema_version", 1},
                                      {"clamp_sigmas", spec.clamp_sigmas},
                                      {"full_reevaluation", spec.full_reevaluation},
                                      {"results", results}});
    }
    return summary;
}

nlohmann::json run_trajectory_command(const CampaignSpec& spec, const Backend& backend) {
    if (spec.limit_state != "power-system")
        throw Error(ErrorCode::invalid_argument, "trajectory needs the power-system backend");
    if (!spec.point_u.empty() && !spec.point_x.empty())
        throw Error(ErrorCode::invalid_argument, "give the scenario as u or as x, not both");

    const int dim = backend.model->dimension();
    Eigen::VectorXd u;
    if (!spec.point_x.empty()) {
        if (static_cast<int>(spec.point_x.size()) != dim)
            throw Error(ErrorCode::invalid_argument, "point_x has wrong dimension");
        u = backend.model->x_to_u(Eigen::Map<const Eigen::VectorXd>(
            spec.point_x.data(), static_cast<Eigen::Index>(spec.point_x.size())));
    } else if (!spec.point_u.empty()) {
        if (static_cast<int>(spec.point_u.size()) != dim)
            throw Error(ErrorCode::invalid_argument, "point_u has wrong dimension");
        u = Eigen::Map<const Eigen::VectorXd>(spec.point_u.data(),
                                              static_cast<Eigen::Index>(spec.point_u.size()));
    } else {
        u = Eigen::VectorXd::Zero(dim);  // median scenario
    }

    const ScenarioPoint point = make_scenario(*backend.model, u);
    const ScenarioInjections injections = assemble_scenario(point, *backend.model, *backend.grid);
    const PowerFlowSolution pf = solve_power_flow(*backend.grid, injections);
    const ReducedNetwork network = reduce_to_internal_nodes(*backend.grid, pf, injections);

    const double clearing_cycles =
        spec.clearing_cycles >= 0.0 ? spec.clearing_cycles : spec.fct_cycles;
    const double clearing_s = clearing_cycles / backend.margin.nominal_frequency;
    const SimResult sim = simulate(network, backend.grid->fault, clearing_s, backend.sim, true);
    const CctResult cct = compute_cct(network, backend.grid->fault, backend.margin, backend.sim);

    if (!spec.out.empty()) {
        std::ofstream out(out_file(spec, "trajectory.csv"));
        if (!out) throw Error(ErrorCode::io, "cannot open trajectory.csv for writing");
        const int ng = network.generator_count();
        out << "time_s";
        for (int i = 1; i <= ng; ++i) out << ",delta_deg_" << i;
        for (int i = 1; i <= ng; ++i) out << ",dw_pu_" << i;
        out << "\n";
        for (const SwingState& s : sim.trajectory) {
            std::string line;
            append_number(line, s.time);
            for (int i = 0; i < ng; ++i) {
                line += ',';
                append_number(line, s.rotor_angles[i] * 180.0 / stats::kPi);
            }
            for (int i = 0; i < ng; ++i) {
                line += ',';
                append_number(line, s.rotor_speed_deviations[i]);
            }
            out << line << "\n";
        }
        if (!out) throw Error(ErrorCode::io, "write to trajectory.csv failed");
    }

    nlohmann::json summary = base_summary(spec);
    summary["clearing_cycles"] = clearing_cycles;
    summary["stable"] = sim.verdict.stable;
    summary["max_angle_separation_deg"] =
        sim.verdict.max_angle_separation * 180.0 / stats::kPi;
    if (sim.verdict.first_violation_time) {
        summary["first_violation_time_s"] = *sim.verdict.first_violation_time;
    } else {
        summary["first_violation_time_s"] = nullptr;
    }
    summary["cct_cycles"] = cct.cct_cycles;
    summary["capped"] = cct.capped;
    summary["ptsm_cycles"] = cct.cct_cycles - spec.fct_cycles;
    summary["x"] = std::vector<double>(point.x.data(), point.x.data() + point.x.size());
    summary["warnings"] = nlohmann::json::array();
    return summary;
}

}  // namespace

nlohmann::json run_campaign(const CampaignSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    if (!spec.out.empty()) fs::create_directories(spec.out);
    const int degree = resolve_parallelism(spec.parallel);

    nlohmann::json summary;
    if (spec.command == "subsim") {
        summary = run_subsim_command(spec, make_backend(spec), degree);
    } else if (spec.command == "dmc") {
        summary = run_dmc_command(spec, make_backend(spec), degree);
    } else if (spec.command == "subsim-repeat" || spec.command == "dmc-repeat") {
        summary = run_repeat_command(spec, make_backend(spec), degree);
    } else if (spec.command == "sensitivity") {
        summary = run_sensitivity_command(spec);
    } else if (spec.command == "compensate") {
        summary = run_compensate_command(spec, degree);
    } else {
        summary = run_trajectory_command(spec, make_backend(spec, false));
    }

    const auto t1 = std::chrono::steady_clock::now();
    summary["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    write_summary(spec, summary);
    return summary;
}

}  // namespace ptsa
