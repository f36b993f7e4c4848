#include "ptsa/ptsa.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "ptsa/campaign.hpp"
#include "ptsa/errors.hpp"
#include "ptsa/limit_state.hpp"

namespace {

thread_local std::string g_last_error = "no error";

ptsa_status status_from(ptsa::ErrorCode code) {
    switch (code) {
        case ptsa::ErrorCode::invalid_argument: return PTSA_ERR_INVALID_ARGUMENT;
        case ptsa::ErrorCode::io: return PTSA_ERR_IO;
        case ptsa::ErrorCode::parse: return PTSA_ERR_PARSE;
        case ptsa::ErrorCode::numerical: return PTSA_ERR_NUMERICAL;
        case ptsa::ErrorCode::unsupported: return PTSA_ERR_UNSUPPORTED;
        case ptsa::ErrorCode::internal: return PTSA_ERR_INTERNAL;
    }
    return PTSA_ERR_INTERNAL;
}

ptsa_status fail(ptsa_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
ptsa_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ptsa::Error& e) {
        return fail(status_from(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(PTSA_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PTSA_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct ptsa_study {
    std::shared_ptr<const ptsa::GridCase> grid;
    std::shared_ptr<const ptsa::InputModel> model;
    ptsa::LimitState limit_state;
};

namespace {

ptsa_status margin_impl(const ptsa_study* study, const double* coords, int dim,
                        double* margin_out, bool physical) {
    if (!study || !coords || !margin_out)
        return fail(PTSA_ERR_INVALID_ARGUMENT, "study, coordinates, and margin_out required");
    if (dim != study->model->dimension())
        return fail(PTSA_ERR_INVALID_ARGUMENT,
                    "dimension mismatch: study expects " +
                        std::to_string(study->model->dimension()) + " inputs");
    return guarded([&]() {
        Eigen::Map<const Eigen::VectorXd> v(coords, dim);
        ptsa::ScenarioPoint point;
        if (physical) {
            point.x = v;
            point.u = study->model->x_to_u(point.x);
        } else {
            point = ptsa::make_scenario(*study->model, v);
        }
        *margin_out = study->limit_state(point);
        return PTSA_OK;
    });
}

}  // namespace

extern "C" {

int ptsa_abi_version(void) { return 1; }

const char* ptsa_status_name(ptsa_status status) {
    switch (status) {
        case PTSA_OK: return "ok";
        case PTSA_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case PTSA_ERR_IO: return "io";
        case PTSA_ERR_PARSE: return "parse";
        case PTSA_ERR_NUMERICAL: return "numerical";
        case PTSA_ERR_UNSUPPORTED: return "unsupported";
        case PTSA_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ptsa_last_error(void) { return g_last_error.c_str(); }

void ptsa_string_free(char* s) { std::free(s); }

ptsa_status ptsa_campaign_run(const char* campaign_json, char** summary_json_out) {
    if (!campaign_json || !summary_json_out)
        return fail(PTSA_ERR_INVALID_ARGUMENT, "campaign_json and summary_json_out required");
    *summary_json_out = nullptr;
    return guarded([&]() {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(campaign_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw ptsa::Error(ptsa::ErrorCode::parse, std::string("campaign spec: ") + e.what());
        }
        const ptsa::CampaignSpec spec = ptsa::CampaignSpec::from_json(j);
        const nlohmann::json summary = ptsa::run_campaign(spec);
        *summary_json_out = dup_string(summary.dump(2));
        if (!*summary_json_out)
            return fail(PTSA_ERR_INTERNAL, "out of memory");
        return PTSA_OK;
    });
}

ptsa_status ptsa_study_open(const char* case_json_path, const char* uncertainty_json_path,
                            const char* options_json, ptsa_study** study_out) {
    if (!case_json_path || !uncertainty_json_path || !study_out)
        return fail(PTSA_ERR_INVALID_ARGUMENT, "case, uncertainty, and study_out required");
    *study_out = nullptr;
    return guarded([&]() {
        auto grid = std::make_shared<const ptsa::GridCase>(
            ptsa::GridCase::from_json_file(case_json_path));
        auto model = std::make_shared<const ptsa::InputModel>(
            ptsa::InputModel::from_json_file(uncertainty_json_path));

        ptsa::MarginConfig margin;
        margin.nominal_frequency = grid->fault.nominal_frequency;
        ptsa::SimConfig sim;
        sim.time_step = 1.0 / (4.0 * grid->fault.nominal_frequency);
        if (options_json && *options_json) {
            nlohmann::json opts;
            try {
                opts = nlohmann::json::parse(options_json);
            } catch (const nlohmann::json::parse_error& e) {
                throw ptsa::Error(ptsa::ErrorCode::parse,
                                  std::string("options: ") + e.what());
            }
            margin.fct_cycles = opts.value("fct_cycles", margin.fct_cycles);
            margin.cct_resolution_cycles =
                opts.value("cct_resolution_cycles", margin.cct_resolution_cycles);
            margin.cct_max_cycles = opts.value("cct_max_cycles", margin.cct_max_cycles);
            sim.time_step = opts.value("dt", sim.time_step);
            sim.horizon = opts.value("horizon", sim.horizon);
            sim.instability_angle_threshold =
                opts.value("instability_angle_threshold", sim.instability_angle_threshold);
        }

        auto study = std::make_unique<ptsa_study>();
        study->grid = grid;
        study->model = model;
        study->limit_state = ptsa::make_power_system_limit_state(grid, model, margin, sim);
        *study_out = study.release();
        return PTSA_OK;
    });
}

void ptsa_study_close(ptsa_study* study) { delete study; }

ptsa_status ptsa_study_dimension(const ptsa_study* study, int* dim_out) {
    if (!study || !dim_out) return fail(PTSA_ERR_INVALID_ARGUMENT, "study and dim_out required");
    *dim_out = study->model->dimension();
    return PTSA_OK;
}

ptsa_status ptsa_study_margin_from_u(const ptsa_study* study, const double* u, int dim,
                                     double* margin_out) {
    return margin_impl(study, u, dim, margin_out, false);
}

ptsa_status ptsa_study_margin_from_x(const ptsa_study* study, const double* x, int dim,
                                     double* margin_out) {
    return margin_impl(study, x, dim, margin_out, true);
}

}  // extern "C"
