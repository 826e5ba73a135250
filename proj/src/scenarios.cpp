#include "fsmpc/scenarios.hpp"

#include <cmath>
#include <limits>

namespace fsmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

Vec vec6(double a, double b, double c, double d, double e, double f) {
    Vec v(6);
    v << a, b, c, d, e, f;
    return v;
}

/// Fields shared by both quadrotor scenarios.
Scenario quad_base(const QuadScenarioOptions& o, const std::string& name) {
    Scenario s;
    s.name = name;
    s.quad = o.quad;
    s.t_lim = o.t_lim;
    auto& c = s.cfg;
    c.sys = quadrotor_linear(o.quad);
    c.T = o.T;
    c.K = o.use_attitude_gain ? quadrotor_attitude_gain(o.quad, o.attitude_gain_r) : Mat::Zero(2, 4);
    c.Q = Mat::Identity(6, 6);
    c.Qf = Mat::Identity(6, 6);
    c.R = Mat::Identity(2, 2);
    c.u_ref = o.quad.hover_input();
    const double u_hi = o.u_hi < 0.0 ? o.quad.m * o.quad.g : o.u_hi;
    c.U = HPolytope::box(Vec::Constant(2, o.u_lo), Vec::Constant(2, u_hi));
    c.W = Zonotope::box(Vec::Zero(6), vec6(0.05, 0.02, 1e-3, 1e-3, 1e-3, 1e-3));
    const auto E = ErrorSet::box(vec6(0.05, 0.05, 0, 0, 0, 0));
    c.E = E.zono;
    c.fallback_reg = o.fallback_reg;
    s.E_hpoly = E.hpoly;
    s.perception.nominal = E.zono;
    s.perception.fault_coords = {0, 1};
    return s;
}

} // namespace

Mat quadrotor_attitude_gain(const QuadrotorParams& p, double r) {
    Mat At(2, 2);
    At << 1.0, p.dt, 0.0, 1.0;
    Mat Bt(2, 1);
    Bt << 0.0, p.dt * 2.0 * p.l / p.I; // differential thrust d: u = (d, -d)
    const Mat Kt = dlqr(At, Bt, Mat::Identity(2, 2), Mat::Constant(1, 1, r));
    Mat K = Mat::Zero(2, 4);
    K(0, 0) = -Kt(0, 0);
    K(0, 3) = -Kt(0, 1);
    K.row(1) = -K.row(0);
    return K;
}

HPolytope landing_recovery_set(const QuadrotorParams& p, const Mat& K, const Vec& eps) {
    // Attitude part: maximal RPI subset of a box for the attitude closed loop.
    const auto sys = quadrotor_linear(p);
    const Mat Acl = sys.closed_loop(K);
    const std::vector<int> att = {2, 5};
    Mat Aa(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Aa(i, j) = Acl(att[i], att[j]);
    Vec lo(2), hi(2);
    lo << -0.1, -0.3;
    hi << 0.1, 0.3;
    const Vec Bep = sys.B * eps;
    Vec dc(2), dr(2);
    dc << Bep(2), Bep(5);
    dr << 1e-3, 1e-3;
    const auto rpi = max_rpi(HPolytope::box(lo, hi), Aa, Zonotope::box(dc, dr));
    if (rpi.status != RpiStatus::Converged) throw Error("landing recovery set: attitude RPI failed");
    const auto& Ha = rpi.set.H();
    Mat H = Mat::Zero(2 + Ha.rows(), 6);
    Vec h(H.rows());
    H(0, 1) = -1.0; // y >= 2
    h(0) = -2.0;
    H(1, 4) = -1.0; // yd >= 1
    h(1) = -1.0;
    for (int i = 0; i < Ha.rows(); ++i) {
        H(2 + i, 2) = Ha(i, 0);
        H(2 + i, 5) = Ha(i, 1);
        h(2 + i) = rpi.set.h()(i);
    }
    return HPolytope(H, h);
}

Scenario make_landing(const QuadScenarioOptions& o) {
    Scenario s = quad_base(o, "landing");
    auto& c = s.cfg;
    c.X = HPolytope::box(vec6(-kInf, 0, -kInf, -kInf, -kInf, -kInf), Vec::Constant(6, kInf));
    const Vec eps = Vec::Constant(2, o.eps);
    const Mat Kr = quadrotor_attitude_gain(o.quad, o.attitude_gain_r);
    c.recovery.push_back({"climb", landing_recovery_set(o.quad, Kr, eps), RecoveryPolicy::affine(eps, Kr)});
    c.goal = o.goal.size() ? o.goal : Vec(Vec::Zero(6));
    s.x0 = o.x0.size() ? o.x0 : vec6(2, 4, 0, 0, 0, 0);
    return s;
}

Scenario make_goal_nav(const QuadScenarioOptions& o) {
    Scenario s = quad_base(o, "goal_nav");
    auto& c = s.cfg;
    c.X = HPolytope::box(vec6(-10, 0, -kInf, -kInf, -kInf, -kInf), vec6(10, 4, kInf, kInf, kInf, kInf));
    const double th = kPi / 12.0, v = 0.1;
    const auto landed = [&](double xlo, double xhi) {
        return HPolytope::box(vec6(xlo, 0, -th, -v, -v, -v), vec6(xhi, o.y_land, th, v, v, v));
    };
    c.recovery.push_back({"land_right", landed(1, 10), RecoveryPolicy::zero()});
    c.recovery.push_back({"land_left", landed(-10, -1), RecoveryPolicy::zero()});
    c.goal = o.goal.size() ? o.goal : vec6(-8, 3, 0, 0, 0, 0);
    s.x0 = o.x0.size() ? o.x0 : vec6(8, 3, 0, 0, 0, 0);
    s.freeze = FreezeRule{o.y_land, th, v};
    s.unsafe_halfwidth = 1.0;
    return s;
}

} // namespace fsmpc
