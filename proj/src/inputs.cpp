#include "ptsa/inputs.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ptsa/errors.hpp"
#include "ptsa/json_util.hpp"
#include "ptsa/stats.hpp"

namespace ptsa {

namespace {

// Beyond this the normal tail probability underflows; the Weibull transform
// saturates instead of producing inf/0.
constexpr double kZClamp = 37.0;

// -log P(Z > z) without cancellation on either tail.
double normal_tail_hazard(double z) {
    if (z < 0.0) return -std::log1p(-stats::norm_cdf(z));
    return -std::log(stats::norm_sf(z));
}

}  // namespace

double MarginalSpec::from_z(double z) const {
    if (kind == MarginalKind::gaussian) return mean + std_dev * z;
    const double zc = std::clamp(z, -kZClamp, kZClamp);
    return scale * std::pow(normal_tail_hazard(zc), 1.0 / shape);
}

double MarginalSpec::to_z(double x) const {
    if (kind == MarginalKind::gaussian) {
        return (x - mean) / std_dev;
    }
    if (!(x > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    name + ": value " + std::to_string(x) + " outside support of the Weibull marginal");
    const double hazard = std::pow(x / scale, shape);
    double z;
    if (hazard > std::log(2.0)) {
        // upper tail: survival function is the numerically clean quantity
        const double sf = std::exp(-std::min(hazard, 700.0));
        z = stats::norm_isf(sf);
    } else {
        z = stats::norm_ppf(-std::expm1(-hazard));
    }
    return std::clamp(z, -kZClamp, kZClamp);
}

InputModel::InputModel(std::vector<MarginalSpec> marginals, std::vector<CopulaPair> pairs)
    : marginals_(std::move(marginals)), pairs_(std::move(pairs)) {
    const int n = static_cast<int>(marginals_.size());
    if (n == 0) throw Error(ErrorCode::invalid_argument, "input model needs at least one marginal");
    for (const auto& m : marginals_) {
        if (m.kind == MarginalKind::gaussian && !(m.std_dev > 0.0))
            throw Error(ErrorCode::invalid_argument, m.name + ": gaussian std must be positive");
        if (m.kind == MarginalKind::weibull && !(m.scale > 0.0 && m.shape > 0.0))
            throw Error(ErrorCode::invalid_argument,
                        m.name + ": weibull scale and shape must be positive");
    }
    correlation_ = Eigen::MatrixXd::Identity(n, n);
    for (const auto& p : pairs_) {
        if (p.i < 0 || p.i >= n || p.j < 0 || p.j >= n || p.i == p.j)
            throw Error(ErrorCode::invalid_argument,
                        "copula pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                            ") does not index two distinct marginals");
        if (!(std::abs(p.rho) < 1.0))
            throw Error(ErrorCode::invalid_argument, "copula correlation must lie in (-1, 1)");
        if (correlation_(p.i, p.j) != 0.0)
            throw Error(ErrorCode::invalid_argument, "duplicate copula pair (" + std::to_string(p.i) +
                                                         ", " + std::to_string(p.j) + ")");
        correlation_(p.i, p.j) = p.rho;
        correlation_(p.j, p.i) = p.rho;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(correlation_);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::invalid_argument, "copula correlation matrix is not positive definite");
    cholesky_lower_ = llt.matrixL();
}

Eigen::VectorXd InputModel::u_to_x(const Eigen::VectorXd& u) const {
    if (u.size() != dimension())
        throw Error(ErrorCode::invalid_argument, "u has wrong dimension");
    const Eigen::VectorXd z = cholesky_lower_ * u;
    Eigen::VectorXd x(dimension());
    for (int i = 0; i < dimension(); ++i) x[i] = marginals_[i].from_z(z[i]);
    return x;
}

Eigen::VectorXd InputModel::x_to_u(const Eigen::VectorXd& x) const {
    if (x.size() != dimension())
        throw Error(ErrorCode::invalid_argument, "x has wrong dimension");
    Eigen::VectorXd z(dimension());
    for (int i = 0; i < dimension(); ++i) z[i] = marginals_[i].to_z(x[i]);
    return cholesky_lower_.triangularView<Eigen::Lower>().solve(z);
}

Eigen::VectorXd InputModel::sample_u(RngStream& rng) const {
    Eigen::VectorXd u(dimension());
    for (int i = 0; i < dimension(); ++i) u[i] = rng.normal();
    return u;
}

ScenarioPoint make_scenario(const InputModel& model, const Eigen::VectorXd& u) {
    return ScenarioPoint{u, model.u_to_x(u)};
}

InputModel InputModel::from_json(const nlohmann::json& j) {
    try {
        std::vector<MarginalSpec> marginals;
        for (const auto& jm : j.at("marginals")) {
            MarginalSpec m;
            const std::string kind = jm.at("kind").get<std::string>();
            const auto& params = jm.at("params");
            if (kind == "gaussian") {
                m.kind = MarginalKind::gaussian;
                m.mean = params.at("mean").get<double>();
                m.std_dev = params.at("std").get<double>();
            } else if (kind == "weibull") {
                m.kind = MarginalKind::weibull;
                m.scale = params.at("scale").get<double>();
                m.shape = params.at("shape").get<double>();
            } else {
                throw Error(ErrorCode::parse, "unknown marginal kind '" + kind + "'");
            }
            const auto& role = jm.at("role");
            const std::string target = role.at("target").get<std::string>();
            if (target == "load_scale") {
                m.target = MarginalTarget::load_scale;
            } else if (target == "wind_speed") {
                m.target = MarginalTarget::wind_speed;
            } else {
                throw Error(ErrorCode::parse, "unknown marginal role target '" + target + "'");
            }
            m.bus = role.at("bus").get<int>();
            m.name = jm.value("name", target + "_bus" + std::to_string(m.bus));
            marginals.push_back(std::move(m));
        }
        std::vector<CopulaPair> pairs;
        if (j.contains("copula")) {
            for (const auto& jp : j.at("copula").value("pairs", nlohmann::json::array())) {
                pairs.push_back({jp.at("i").get<int>(), jp.at("j").get<int>(),
                                 jp.at("rho").get<double>()});
            }
        }
        return InputModel(std::move(marginals), std::move(pairs));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("uncertainty spec: ") + e.what());
    }
}

InputModel InputModel::from_json_file(const std::string& path) {
    return from_json(load_json_file(path));
}

nlohmann::json InputModel::to_json() const {
    nlohmann::json j;
    j["marginals"] = nlohmann::json::array();
    for (const auto& m : marginals_) {
        nlohmann::json jm;
        jm["name"] = m.name;
        if (m.kind == MarginalKind::gaussian) {
            jm["kind"] = "gaussian";
            jm["params"] = {{"mean", m.mean}, {"std", m.std_dev}};
        } else {
            jm["kind"] = "weibull";
            jm["params"] = {{"scale", m.scale}, {"shape", m.shape}};
        }
        jm["role"] = {
            {"target", m.target == MarginalTarget::load_scale ? "load_scale" : "wind_speed"},
            {"bus", m.bus}};
        j["marginals"].push_back(std::move(jm));
    }
    nlohmann::json jpairs = nlohmann::json::array();
    for (const auto& p : pairs_) jpairs.push_back({{"i", p.i}, {"j", p.j}, {"rho", p.rho}});
    j["copula"] = {{"pairs", std::move(jpairs)}};
    return j;
}

double wind_power_fraction(double v, double v_in, double v_r, double v_out) {
    if (v >= v_in && v < v_r) {
        const double c = v * v * v - v_in * v_in * v_in;
        return c / (v_r * v_r * v_r - v_in * v_in * v_in);
    }
    if (v >= v_r && v <= v_out) return 1.0;
    return 0.0;  // below cut-in, above cut-out, or non-physical speed
}

double wind_farm_power_mw(const WindFarmSpec& farm, double wind_speed) {
    return farm.rated_power * wind_power_fraction(wind_speed, farm.v_in, farm.v_r, farm.v_out);
}

ScenarioInjections assemble_scenario(const ScenarioPoint& point, const InputModel& model,
                                     const GridCase& grid) {
    if (point.x.size() != model.dimension())
        throw Error(ErrorCode::invalid_argument, "scenario point has wrong dimension");
    ScenarioInjections inj;
    const auto& marginals = model.marginals();
    for (int i = 0; i < model.dimension(); ++i) {
        const MarginalSpec& m = marginals[i];
        if (m.target == MarginalTarget::load_scale) {
            const LoadSpec* load = nullptr;
            for (const auto& l : grid.loads)
                if (l.bus == m.bus) load = &l;
            if (!load)
                throw Error(ErrorCode::invalid_argument,
                            m.name + " targets bus " + std::to_string(m.bus) +
                                " but the case has no load there");
            double scale = point.x[i];
            if (scale < 0.0) {
                scale = 0.0;
                inj.load_clamped = true;
            }
            inj.load_overrides[m.bus] = {load->base_active_power * scale,
                                         load->base_reactive_power * scale};
        } else {
            const WindFarmSpec* farm = nullptr;
            for (const auto& w : grid.wind_farms)
                if (w.bus == m.bus) farm = &w;
            if (!farm)
                throw Error(ErrorCode::invalid_argument,
                            m.name + " targets bus " + std::to_string(m.bus) +
                                " but the case has no wind farm there");
            inj.wind_mw[m.bus] = wind_farm_power_mw(*farm, point.x[i]);
        }
    }
    return inj;
}

}  // namespace ptsa
