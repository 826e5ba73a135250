#pragma once

#include "fsmpc/sim.hpp"

namespace fsmpc {

struct QuadScenarioOptions {
    QuadrotorParams quad;
    int T = 10;
    int t_lim = 53;
    double y_land = 2.8;      ///< goal_nav landed band height
    double eps = 0.5;         ///< landing recovery thrust offset per rotor
    double fallback_reg = 1e-3;
    double attitude_gain_r = 1.0; ///< LQR input weight for the attitude gain
    bool use_attitude_gain = true;
    double u_lo = 0.0;        ///< per-rotor thrust bounds, absolute
    double u_hi = -1.0;       ///< negative: m g
    Vec x0;                   ///< empty: scenario default
    Vec goal;                 ///< empty: scenario default
};

/// Attitude-stabilizing output gain on [th, xd, yd, thd] (differential thrust only).
Mat quadrotor_attitude_gain(const QuadrotorParams& p, double r = 1.0);

/// Landing: descend towards the origin, recover by climbing away.
Scenario make_landing(const QuadScenarioOptions& o = {});
/// Goal navigation: cross the unsafe strip towards (-8, 3), recover by landing on either side.
Scenario make_goal_nav(const QuadScenarioOptions& o = {});

/// The landing recovery set {y >= 2, yd >= 1, attitude in an invariant box}.
HPolytope landing_recovery_set(const QuadrotorParams& p, const Mat& K, const Vec& eps);

} // namespace fsmpc
