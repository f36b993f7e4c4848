#pragma once

#include <functional>
#include <memory>

#include "ptsa/inputs.hpp"
#include "ptsa/margin.hpp"

namespace ptsa {

/// Margin function consumed by the estimators; failure is margin < 0.
/// Must be total and pure (safe to call concurrently).
using LimitState = std::function<double(const ScenarioPoint&)>;

/// g(point) = beta - sum(u) / sqrt(dim): failure probability Phi(-beta) exactly.
LimitState make_linear_beta_limit_state(double beta);

LimitState make_constant_limit_state(double value);

/// The real thing: PTSM in cycles via power flow, reduction, and CCT search.
/// Owns shared copies of the case and input model so the closure is self-contained.
LimitState make_power_system_limit_state(std::shared_ptr<const GridCase> grid,
                                         std::shared_ptr<const InputModel> model,
                                         const MarginConfig& cfg, const SimConfig& sim);

/// Input model with dim independent standard-normal marginals (u = x); the
/// sampling substrate for the analytic limit states.
InputModel make_standard_normal_model(int dim);

}  // namespace ptsa
