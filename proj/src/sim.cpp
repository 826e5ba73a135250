#include "fsmpc/sim.hpp"

#include "fsmpc/baselines.hpp"

#include <cmath>

namespace fsmpc {

Environment sample_environment(const EnvDistribution& d, std::mt19937_64& rng) {
    if (!(d.p_fault >= 0.0 && d.p_fault <= 1.0)) throw Error("fault probability must lie in [0, 1]");
    if (d.start_lo < 0 || d.start_hi < d.start_lo) throw Error("invalid fault start window");
    Environment env;
    env.fault_enabled = std::bernoulli_distribution(d.p_fault)(rng);
    env.fault_start = std::uniform_int_distribution<int>(d.start_lo, d.start_hi)(rng);
    env.rng_seed = rng();
    return env;
}

const char* to_string(ScoreModel s) {
    switch (s) {
    case ScoreModel::Perfect: return "perfect";
    case ScoreModel::NoisyNorm: return "noisy_norm";
    case ScoreModel::PureNoise: return "pure_noise";
    }
    return "?";
}

ScoreModel score_model_from_string(const std::string& s) {
    if (s == "perfect") return ScoreModel::Perfect;
    if (s == "noisy_norm") return ScoreModel::NoisyNorm;
    if (s == "pure_noise") return ScoreModel::PureNoise;
    throw Error("unknown score model: " + s);
}

const char* to_string(ControllerKind k) {
    switch (k) {
    case ControllerKind::FallbackSafe: return "fallback_safe";
    case ControllerKind::NaiveTube: return "naive_tube";
    case ControllerKind::UnsafeFallback: return "unsafe_fallback";
    }
    return "?";
}

ControllerKind controller_kind_from_string(const std::string& s) {
    if (s == "fallback_safe") return ControllerKind::FallbackSafe;
    if (s == "naive_tube") return ControllerKind::NaiveTube;
    if (s == "unsafe_fallback") return ControllerKind::UnsafeFallback;
    throw Error("unknown controller: " + s);
}

bool FreezeRule::applies(const Vec& x) const {
    return x(1) <= y_land && std::abs(x(2)) <= theta_max && std::abs(x(3)) <= v_max &&
           std::abs(x(4)) <= v_max && std::abs(x(5)) <= v_max;
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Baseline controllers: single-trajectory tube MPC that replays its last plan
/// when infeasible, optionally reacting to alarms with a post-hoc fallback plan.
class BaselineController {
public:
    BaselineController(const MPCConfig& cfg, bool react)
        : cfg_(cfg), mpc_(naive_config(cfg)), tubes_(build_tubes(cfg)), react_(react) {}

    struct Out {
        Vec u;
        Mode mode;
        bool feasible;
        bool triggered;
    };

    Out step(int t, const Vec& xhat, const Vec& y, bool alarm) {
        Out o{Vec(), mode_, true, false};
        if (mode_ == Mode::Nominal && react_ && alarm && t > 0) {
            // Propagate the last estimate before the alarm one step and plan from there.
            const Vec x_prop = cfg_.sys.A * last_xhat_ + cfg_.sys.B * (last_u_ - cfg_.u_ref);
            fb_plan_ = soft_fallback_plan(cfg_, tubes_, x_prop);
            if (!fb_plan_) throw Error("soft fallback plan failed");
            mode_ = Mode::Fallback;
            k_ = 0;
            o.triggered = true;
        }
        if (mode_ == Mode::Nominal) {
            auto sol = mpc_.solve(xhat);
            o.feasible = sol.has_value();
            if (sol) {
                plan_ = std::move(sol);
                shift_ = 0;
                o.u = plan_->u_nom[0];
            } else {
                if (!plan_) throw ProtocolError("MPC infeasible before any feasible plan");
                ++shift_;
                o.u = shift_ <= cfg_.T ? plan_->u_nom[shift_] : cfg_.u_ref;
            }
            last_xhat_ = xhat;
            last_u_ = o.u;
        } else if (mode_ == Mode::Fallback) {
            o.mode = Mode::Fallback;
            o.u = fb_plan_->u_fb[k_] + cfg_.K * (y - fb_plan_->y_fb[k_]);
            if (++k_ > cfg_.T) mode_ = Mode::Recovery;
        } else {
            o.mode = Mode::Recovery;
            o.u = project(cfg_.U, cfg_.recovery.at(fb_plan_->recovery_index).policy.input(y, cfg_.u_ref));
        }
        return o;
    }

    int recovery_index() const { return fb_plan_ ? fb_plan_->recovery_index : -1; }

private:
    const MPCConfig& cfg_;
    TubeMPC mpc_;
    TubeSets tubes_;
    bool react_;
    Mode mode_ = Mode::Nominal;
    std::optional<MPCSolution> plan_, fb_plan_;
    int shift_ = 0, k_ = 0;
    Vec last_xhat_, last_u_;
};

} // namespace

Trajectory run_episode(const Scenario& scn, const Environment& env, const Monitor& monitor,
                       ControllerKind kind) {
    const auto& cfg = scn.cfg;
    const auto& sys = cfg.sys;
    Trajectory tr;
    tr.scenario = scn.name;
    tr.controller = to_string(kind);
    tr.seed = env.rng_seed;
    tr.env = env;

    std::mt19937_64 rng(env.rng_seed);
    std::mt19937_64 mon_rng(splitmix(env.rng_seed ^ 0x6d6f6e69746f72ULL));
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> fault_draw(scn.perception.fault_lo, scn.perception.fault_hi);

    std::optional<TubeMPC> mpc;
    std::optional<BaselineController> base;
    if (kind == ControllerKind::FallbackSafe)
        mpc.emplace(cfg);
    else
        base.emplace(cfg, kind == ControllerKind::UnsafeFallback);
    ControllerState cs;

    Vec x = scn.x0;
    bool frozen = false;
    for (int t = 0; t <= scn.t_lim; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.x = x;
        const bool faulty = env.fault_enabled && t >= env.fault_start;
        Vec e = sample(scn.perception.nominal, rng);
        Vec xhat = x - e;
        if (faulty) {
            for (int c : scn.perception.fault_coords) xhat(c) = fault_draw(rng);
            e = x - xhat;
        }
        rec.xhat = xhat;
        rec.y = sys.C * x;
        switch (scn.perception.score) {
        case ScoreModel::Perfect: rec.a = contains(scn.E_hpoly, e) ? 0.0 : 1.0; break;
        case ScoreModel::NoisyNorm: rec.a = e.norm() + scn.perception.sigma * gauss(rng); break;
        case ScoreModel::PureNoise: rec.a = gauss(rng); break;
        }
        rec.alarm = monitor ? monitor(rec.a, e, mon_rng) : false;

        try {
            if (mpc) {
                auto step = controller_step(std::move(cs), xhat, rec.y, rec.alarm, *mpc);
                cs = std::move(step.state);
                rec.u = step.u;
                rec.mode = step.diag.mode;
                rec.feasible = !step.diag.solved || step.diag.feasible;
                if (step.diag.solved && !step.diag.feasible) ++tr.infeasible_nominal;
                if (step.diag.triggered) tr.t_fail = t;
                tr.recovery_index = step.diag.recovery_index;
            } else {
                const bool alarm = kind == ControllerKind::UnsafeFallback && rec.alarm;
                auto o = base->step(t, xhat, rec.y, alarm);
                rec.u = o.u;
                rec.mode = o.mode;
                rec.feasible = o.feasible;
                if (!o.feasible && o.mode == Mode::Nominal) ++tr.infeasible_nominal;
                if (o.triggered) tr.t_fail = t;
                tr.recovery_index = base->recovery_index();
            }
        } catch (const ProtocolError& err) {
            tr.aborted = true;
            tr.steps.push_back(rec);
            throw PreconditionViolation(err.what(), std::move(tr));
        }
        tr.steps.push_back(rec);

        if (!frozen) {
            const Vec w = sample(cfg.W, rng);
            if (scn.nonlinear)
                x = quadrotor_step(scn.quad, x, rec.u) + w;
            else
                x = sys.A * x + sys.B * (rec.u - cfg.u_ref) + w;
            if (scn.freeze && scn.freeze->applies(x)) {
                frozen = true;
                tr.frozen_at = t + 1;
            }
        }
    }

    const auto rep = check_safety(tr, cfg.X, cfg.U);
    tr.violated_X = rep.first_x_violation >= 0;
    tr.violated_U = rep.first_u_violation >= 0;
    if (tr.frozen_at >= 0 && scn.unsafe_halfwidth > 0.0)
        tr.unsafe_stop = std::abs(tr.steps.back().x(0)) < scn.unsafe_halfwidth;
    if (tr.t_fail >= 0 && tr.recovery_index >= 0) {
        const int t_rec = tr.t_fail + cfg.T;
        if (t_rec <= scn.t_lim)
            tr.reached_recovery = contains(cfg.recovery[tr.recovery_index].X_R, tr.steps[t_rec].x, 1e-7);
    }
    return tr;
}

SafetyReport check_safety(const Trajectory& tr, const HPolytope& X, const HPolytope& U, double tol) {
    SafetyReport r;
    for (const auto& s : tr.steps) {
        if (r.first_x_violation < 0 && !contains(X, s.x, tol)) r.first_x_violation = s.t;
        if (r.first_u_violation < 0 && s.u.size() && !contains(U, s.u, tol)) r.first_u_violation = s.t;
    }
    r.unsafe_stop = tr.unsafe_stop;
    r.safe = r.first_x_violation < 0 && r.first_u_violation < 0 && !r.unsafe_stop;
    return r;
}

} // namespace fsmpc
