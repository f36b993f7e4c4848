#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptsa/grid.hpp"
#include "ptsa/rng.hpp"

namespace ptsa {

enum class MarginalKind { gaussian, weibull };

enum class MarginalTarget { load_scale, wind_speed };

struct MarginalSpec {
    std::string name;  // e.g. "load_scale_bus5", "wind_speed_bus2"
    MarginalKind kind = MarginalKind::gaussian;
    MarginalTarget target = MarginalTarget::load_scale;
    int bus = 0;
    // gaussian
    double mean = 1.0;
    double std_dev = 0.1;
    // weibull
    double scale = 11.2;
    double shape = 2.2;

    /// Physical value from a standard-normal coordinate.
    double from_z(double z) const;
    /// Inverse of from_z; throws "outside support" when x is unreachable.
    double to_z(double x) const;
};

struct CopulaPair {
    int i = 0;
    int j = 0;
    double rho = 0.0;
};

/// 5-dimensional uncertain input: correlated standard-normal space u, physical
/// space x. Correlation is a Gaussian copula applied in normal space.
class InputModel {
public:
    InputModel(std::vector<MarginalSpec> marginals, std::vector<CopulaPair> pairs);

    static InputModel from_json(const nlohmann::json& j);
    static InputModel from_json_file(const std::string& path);
    nlohmann::json to_json() const;

    int dimension() const { return static_cast<int>(marginals_.size()); }
    const std::vector<MarginalSpec>& marginals() const { return marginals_; }
    const std::vector<CopulaPair>& copula_pairs() const { return pairs_; }
    const Eigen::MatrixXd& correlation() const { return correlation_; }

    /// Map independent standard normals to physical values.
    Eigen::VectorXd u_to_x(const Eigen::VectorXd& u) const;
    /// Exact inverse of u_to_x.
    Eigen::VectorXd x_to_u(const Eigen::VectorXd& x) const;

    Eigen::VectorXd sample_u(RngStream& rng) const;

private:
    std::vector<MarginalSpec> marginals_;
    std::vector<CopulaPair> pairs_;
    Eigen::MatrixXd correlation_;
    Eigen::MatrixXd cholesky_lower_;
};

/// One realisation of the uncertain inputs in both coordinate systems.
struct ScenarioPoint {
    Eigen::VectorXd u;
    Eigen::VectorXd x;
};

ScenarioPoint make_scenario(const InputModel& model, const Eigen::VectorXd& u);

/// Power-curve output of a single turbine as a fraction of its rating.
double wind_power_fraction(double v, double v_in, double v_r, double v_out);

/// Aggregate farm output in MW for a hub-height wind speed.
double wind_farm_power_mw(const WindFarmSpec& farm, double wind_speed);

/// Turn a scenario point into concrete load/wind injections for the grid.
/// Negative scaled loads are clamped to zero and flagged.
ScenarioInjections assemble_scenario(const ScenarioPoint& point, const InputModel& model,
                                     const GridCase& grid);

}  // namespace ptsa
