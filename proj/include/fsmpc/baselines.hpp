#pragma once

#include "fsmpc/mpc.hpp"

#include <optional>

namespace fsmpc {

/// Fallback plan computed after the fact by the unsafe-fallback baseline:
/// state and terminal constraints are softened with penalized slacks, so a plan
/// always exists. Picks the recovery set with the lowest penalized cost.
std::optional<MPCSolution> soft_fallback_plan(const MPCConfig& cfg, const TubeSets& tubes,
                                              const Vec& xhat, double slack_weight = 1e4);

/// Config for the single-trajectory tube MPC used by both baselines: no terminal
/// recovery constraint (one universe recovery set).
MPCConfig naive_config(const MPCConfig& cfg);

} // namespace fsmpc
