#include "ptsa/limit_state.hpp"

#include <cmath>

#include "ptsa/errors.hpp"

namespace ptsa {

LimitState make_linear_beta_limit_state(double beta) {
    return [beta](const ScenarioPoint& point) {
        const double dim = static_cast<double>(point.u.size());
        return beta - point.u.sum() / std::sqrt(dim);
    };
}

LimitState make_constant_limit_state(double value) {
    return [value](const ScenarioPoint&) { return value; };
}

LimitState make_power_system_limit_state(std::shared_ptr<const GridCase> grid,
                                         std::shared_ptr<const InputModel> model,
                                         const MarginConfig& cfg, const SimConfig& sim) {
    if (!grid || !model)
        throw Error(ErrorCode::invalid_argument, "limit state needs a case and an input model");
    cfg.validate();
    sim.validate();
    return [grid, model, cfg, sim](const ScenarioPoint& point) {
        return evaluate_margin(point, *grid, *model, cfg, sim).ptsm_cycles;
    };
}

InputModel make_standard_normal_model(int dim) {
    std::vector<MarginalSpec> marginals(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        MarginalSpec& m = marginals[static_cast<size_t>(i)];
        m.name = "u" + std::to_string(i + 1);
        m.kind = MarginalKind::gaussian;
        m.mean = 0.0;
        m.std_dev = 1.0;
        m.bus = i + 1;
    }
    return InputModel(std::move(marginals), {});
}

}  // namespace ptsa
