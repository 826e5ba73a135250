#include "fsmpc/controller.hpp"

namespace fsmpc {

const char* to_string(Mode m) {
    switch (m) {
    case Mode::Nominal: return "nominal";
    case Mode::Fallback: return "fallback";
    case Mode::Recovery: return "recovery";
    }
    return "?";
}

Vec project(const HPolytope& P, const Vec& v) {
    if (contains(P, v)) return v;
    QPProblem prob;
    const auto n = v.size();
    prob.P = Mat::Identity(n, n);
    prob.q = -v;
    prob.G = P.H();
    prob.h = P.h();
    prob.A_eq = Mat(0, n);
    prob.b_eq = Vec(0);
    const auto sol = solve_qp(prob, 1e-10);
    if (sol.status != QPStatus::Optimal) throw Error("project: target set is empty");
    return sol.z;
}

namespace {

Vec fallback_input(const ControllerState& s, const Vec& y, const MPCConfig& cfg) {
    const auto& plan = *s.plan;
    const auto j = static_cast<std::size_t>(s.k + 1);
    return plan.u_fb[j] + cfg.K * (y - plan.y_fb[j]);
}

} // namespace

ControllerStep controller_step(ControllerState s, const Vec& xhat, const Vec& y, bool alarm,
                               TubeMPC& mpc) {
    const auto& cfg = mpc.config();
    require_dims(y.size() == cfg.sys.r(), "controller_step: y");
    ControllerStep out;
    out.diag.mode = s.mode;

    if (s.mode == Mode::Nominal) {
        bool trigger = alarm;
        if (!alarm) {
            auto sol = mpc.solve(xhat);
            out.diag.solved = true;
            out.diag.feasible = sol.has_value();
            if (sol) {
                out.diag.recovery_index = sol->recovery_index;
                out.diag.qp_iterations = sol->qp_iterations;
                out.u = sol->u_nom[0];
                s.plan = std::move(sol);
            } else {
                trigger = true;
            }
        }
        if (trigger) {
            if (!s.plan) throw ProtocolError(alarm ? "alarm before any feasible plan"
                                                   : "MPC infeasible before any feasible plan");
            s.mode = Mode::Fallback;
            s.k = 0;
            s.t_fail = s.t;
            out.diag.triggered = true;
            out.diag.mode = Mode::Fallback;
        }
    }

    if (s.mode == Mode::Fallback && !out.u.size()) {
        out.diag.mode = Mode::Fallback;
        out.diag.recovery_index = s.plan->recovery_index;
        out.u = fallback_input(s, y, cfg);
        if (++s.k >= cfg.T) s.mode = Mode::Recovery;
    } else if (s.mode == Mode::Recovery && out.diag.mode == Mode::Recovery) {
        const int idx = s.plan->recovery_index;
        out.diag.recovery_index = idx;
        const Vec u = cfg.recovery.at(idx).policy.input(y, cfg.u_ref);
        out.u = project(cfg.U, u);
        out.diag.clamped = !(out.u.array() == u.array()).all();
    }
    ++s.t;
    out.state = std::move(s);
    return out;
}

} // namespace fsmpc
