// Exercises libptsa exactly as an external client would: through the C header
// only, linked against the shared library.

#include "doctest.h"

#include <string>

#include <nlohmann/json.hpp>

#include "ptsa/ptsa.h"

namespace {

const std::string kCase = std::string(PTSA_DATA_DIR) + "/wscc9.json";
const std::string kUncertainty = std::string(PTSA_DATA_DIR) + "/uncertainty_9bus.json";

struct StudyGuard {
    ptsa_study* study = nullptr;
    ~StudyGuard() { ptsa_study_close(study); }
};

}  // namespace

TEST_CASE("abi version and status names") {
    CHECK(ptsa_abi_version() == 1);
    CHECK(std::string(ptsa_status_name(PTSA_OK)) == "ok");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_INVALID_ARGUMENT)) == "invalid_argument");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_IO)) == "io");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_PARSE)) == "parse");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_NUMERICAL)) == "numerical");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_UNSUPPORTED)) == "unsupported");
    CHECK(std::string(ptsa_status_name(PTSA_ERR_INTERNAL)) == "internal");
    CHECK(std::string(ptsa_status_name(static_cast<ptsa_status>(99))) == "unknown");
    CHECK(ptsa_last_error() != nullptr);

    ptsa_string_free(nullptr);  // must be a no-op
    ptsa_study_close(nullptr);
}

TEST_CASE("campaign run through the C boundary") {
    const std::string spec = R"({"command":"dmc","limit_state":"linear-beta","beta":1.0,)"
                             R"("dimension":2,"n":500,"seed":3})";
    char* summary = nullptr;
    REQUIRE(ptsa_campaign_run(spec.c_str(), &summary) == PTSA_OK);
    REQUIRE(summary != nullptr);
    const nlohmann::json j = nlohmann::json::parse(summary);
    ptsa_string_free(summary);

    CHECK(j.at("command") == "dmc");
    CHECK(j.at("n") == 500);
    const double p = j.at("p_f_hat").get<double>();
    CHECK(p > 0.10);  // Phi(-1) with 500-sample noise
    CHECK(p < 0.22);
    CHECK(j.contains("analytic_cov"));
    CHECK(j.contains("wall_time_s"));
}

TEST_CASE("campaign errors map to C statuses") {
    char* summary = nullptr;

    CHECK(ptsa_campaign_run(nullptr, &summary) == PTSA_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ptsa_last_error()).find("required") != std::string::npos);

    CHECK(ptsa_campaign_run("this is not json", &summary) == PTSA_ERR_PARSE);
    CHECK(summary == nullptr);
    CHECK(std::string(ptsa_last_error()).find("campaign spec") != std::string::npos);

    const std::string bad_cmd = R"({"command":"frobnicate"})";
    CHECK(ptsa_campaign_run(bad_cmd.c_str(), &summary) == PTSA_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ptsa_last_error()).find("unknown command") != std::string::npos);

    const std::string no_files = R"({"command":"subsim"})";
    CHECK(ptsa_campaign_run(no_files.c_str(), &summary) == PTSA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("study margins for the bundled case") {
    StudyGuard g;
    REQUIRE(ptsa_study_open(kCase.c_str(), kUncertainty.c_str(), nullptr, &g.study) == PTSA_OK);
    REQUIRE(g.study != nullptr);

    int dim = 0;
    REQUIRE(ptsa_study_dimension(g.study, &dim) == PTSA_OK);
    REQUIRE(dim == 5);

    const double u0[5] = {0, 0, 0, 0, 0};
    double margin = 0.0;
    REQUIRE(ptsa_study_margin_from_u(g.study, u0, 5, &margin) == PTSA_OK);
    CHECK(margin == doctest::Approx(7.0));

    const double x_median[5] = {1.0, 1.0, 1.0, 9.481257889387141, 9.481257889387141};
    REQUIRE(ptsa_study_margin_from_x(g.study, x_median, 5, &margin) == PTSA_OK);
    CHECK(margin == doctest::Approx(7.0));

    const double x_rated[5] = {1.0, 1.0, 1.0, 11.4, 11.4};
    REQUIRE(ptsa_study_margin_from_x(g.study, x_rated, 5, &margin) == PTSA_OK);
    CHECK(margin == doctest::Approx(3.5));

    CHECK(ptsa_study_margin_from_u(g.study, u0, 3, &margin) == PTSA_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ptsa_last_error()).find("expects 5 inputs") != std::string::npos);
    CHECK(ptsa_study_margin_from_u(nullptr, u0, 5, &margin) == PTSA_ERR_INVALID_ARGUMENT);
    CHECK(ptsa_study_dimension(g.study, nullptr) == PTSA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("study options shift the margin definition") {
    StudyGuard longer;
    REQUIRE(ptsa_study_open(kCase.c_str(), kUncertainty.c_str(), R"({"fct_cycles":10.0})",
                            &longer.study) == PTSA_OK);
    const double u0[5] = {0, 0, 0, 0, 0};
    double margin = 0.0;
    REQUIRE(ptsa_study_margin_from_u(longer.study, u0, 5, &margin) == PTSA_OK);
    CHECK(margin == doctest::Approx(3.0));  // same 13-cycle CCT, later clearing

    StudyGuard capped;
    REQUIRE(ptsa_study_open(kCase.c_str(), kUncertainty.c_str(), R"({"cct_max_cycles":8.0})",
                            &capped.study) == PTSA_OK);
    REQUIRE(ptsa_study_margin_from_u(capped.study, u0, 5, &margin) == PTSA_OK);
    CHECK(margin == doctest::Approx(2.0));  // search stops at the cap
}

TEST_CASE("study open failure paths") {
    ptsa_study* study = nullptr;
    CHECK(ptsa_study_open("/tmp/ptsa_no_such_case.json", kUncertainty.c_str(), nullptr,
                          &study) == PTSA_ERR_IO);
    CHECK(study == nullptr);
    CHECK(std::string(ptsa_last_error()).find("cannot open") != std::string::npos);

    CHECK(ptsa_study_open(kCase.c_str(), kUncertainty.c_str(), "{{{", &study) ==
          PTSA_ERR_PARSE);
    CHECK(std::string(ptsa_last_error()).find("options") != std::string::npos);

    CHECK(ptsa_study_open(nullptr, kUncertainty.c_str(), nullptr, &study) ==
          PTSA_ERR_INVALID_ARGUMENT);
}
