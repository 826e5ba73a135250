#include "fsmpc/mpc.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace fsmpc {

Vec RecoveryPolicy::input(const Vec& y, const Vec& u_ref) const {
    if (kind == Kind::Zero) return Vec::Zero(u_ref.size());
    require_dims(K.cols() == y.size() && eps.size() == u_ref.size(), "RecoveryPolicy::input");
    return u_ref + eps + K * y;
}

namespace {

bool is_psd(const Mat& M, bool strict) {
    if (M.rows() != M.cols() || !M.isApprox(M.transpose(), 1e-12)) return false;
    const double lo = Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff();
    return strict ? lo > 0.0 : lo >= -1e-12;
}

} // namespace

void MPCConfig::validate() const {
    sys.validate();
    const int n = sys.n(), m = sys.m(), r = sys.r();
    if (T < 1) throw Error("MPCConfig: T must be at least 1");
    require_dims(K.rows() == m && K.cols() == r, "MPCConfig: K shape");
    require_dims(Q.rows() == n && Qf.rows() == n && R.rows() == m, "MPCConfig: cost shapes");
    if (!is_psd(Q, false) || !is_psd(Qf, false)) throw Error("MPCConfig: Q and Qf must be PSD");
    if (!is_psd(R, true)) throw Error("MPCConfig: R must be positive definite");
    require_dims(X.dim() == n && U.dim() == m, "MPCConfig: X/U dimension");
    require_dims(W.dim() == n && E.dim() == n, "MPCConfig: W/E dimension");
    require_dims(goal.size() == n && u_ref.size() == m, "MPCConfig: goal/u_ref size");
    if (recovery.empty()) throw Error("MPCConfig: at least one recovery set is required");
    for (const auto& rs : recovery) {
        require_dims(rs.X_R.dim() == n, "MPCConfig: recovery set dimension");
        if (rs.policy.kind == RecoveryPolicy::Kind::AffineOutput)
            require_dims(rs.policy.K.rows() == m && rs.policy.K.cols() == r && rs.policy.eps.size() == m,
                         "MPCConfig: recovery policy shape");
    }
    if (!(fallback_reg > 0.0)) throw Error("MPCConfig: fallback_reg must be positive");
}

TubeSets build_tubes(const MPCConfig& cfg) {
    cfg.validate();
    const int n = cfg.sys.n();
    const Mat Acl = cfg.closed_loop();
    const Mat KC = cfg.K * cfg.sys.C;
    const Zonotope step = mink_sum(mink_sum(affine_map(cfg.E, Acl), cfg.W), cfg.E);
    TubeSets t;
    t.F.push_back(Zonotope::point(Vec::Zero(n)));
    for (int k = 0; k <= cfg.T; ++k) t.F.push_back(mink_sum(affine_map(t.F.back(), Acl), step));
    for (int k = 0; k <= cfg.T; ++k) {
        const Zonotope FE = mink_sum(t.F[k], cfg.E);
        auto xs = pont_diff(cfg.X, FE);
        if (xs.empty) throw EmptyTightening("tightened state constraint is empty", k);
        t.X_tight.push_back(std::move(xs.set));
        auto us = pont_diff(cfg.U, affine_map(FE, KC));
        if (us.empty) throw EmptyTightening("tightened input constraint is empty", k);
        t.U_tight.push_back(std::move(us.set));
    }
    const Zonotope FE_end = mink_sum(t.F[cfg.T + 1], cfg.E);
    for (const auto& rs : cfg.recovery) {
        auto xr = pont_diff(rs.X_R, FE_end);
        if (xr.empty) throw EmptyTightening("tightened recovery set '" + rs.name + "' is empty", cfg.T + 1);
        t.XR_tight.push_back(std::move(xr.set));
    }
    return t;
}

bool recovery_input_admissible(const RecoverySet& rs, const MPCConfig& cfg) {
    const auto& pol = rs.policy;
    if (pol.kind == RecoveryPolicy::Kind::Zero) return contains(cfg.U, Vec::Zero(cfg.sys.m()));
    const Vec base = cfg.u_ref + pol.eps;
    const Mat KC = pol.K * cfg.sys.C;
    for (int i = 0; i < cfg.U.num_facets(); ++i) {
        const Vec a = cfg.U.H().row(i).transpose();
        const Vec d = KC.transpose() * a;
        const auto sx = rs.X_R.support(d);
        if (!sx) return false;
        if (a.dot(base) + *sx + support(cfg.E, d) > cfg.U.h()(i) + kMembershipTol) return false;
    }
    return true;
}

// ------------------------------------------------------------------ TubeMPC

namespace {

/// Condensed QP for one recovery set: G z <= h0 + Hx xhat.
struct SetQP {
    QPSolver solver;
    Vec h0;
    Mat Hx;
};

} // namespace

struct TubeMPC::Impl {
    int n = 0, m = 0, T = 0, nz = 0;
    std::vector<Mat> Phi;   ///< A^k, k = 0..T+1
    std::vector<Mat> Gam;   ///< x_k = Phi_k x0 + Gam_k useq, k = 0..T+1
    Mat Sf, Sn;             ///< z -> fallback / nominal input sequences
    Mat P;                  ///< QP Hessian
    Mat qx, qg;             ///< q = qx xhat + qg goal
    std::vector<SetQP> qps;
};

TubeMPC::TubeMPC(MPCConfig cfg) : TubeMPC(cfg, build_tubes(cfg)) {}

TubeMPC::TubeMPC(MPCConfig cfg, TubeSets tubes)
    : cfg_(std::move(cfg)), tubes_(std::move(tubes)), impl_(std::make_unique<Impl>()) {
    cfg_.validate();
    auto& I = *impl_;
    const auto& A = cfg_.sys.A;
    const auto& B = cfg_.sys.B;
    I.n = cfg_.sys.n();
    I.m = cfg_.sys.m();
    I.T = cfg_.T;
    const int n = I.n, m = I.m, T = I.T;
    const int nu = m * (T + 1);
    I.nz = cfg_.single_trajectory ? nu : nu + m * T;
    require_dims(static_cast<int>(tubes_.XR_tight.size()) == static_cast<int>(cfg_.recovery.size()),
                 "TubeMPC: tubes do not match recovery sets");

    I.Phi.push_back(Mat::Identity(n, n));
    I.Gam.push_back(Mat::Zero(n, nu));
    for (int k = 0; k <= T; ++k) {
        I.Phi.push_back(A * I.Phi.back());
        Mat G = A * I.Gam.back();
        G.block(0, k * m, n, m) += B;
        I.Gam.push_back(std::move(G));
    }
    I.Sf = Mat::Zero(nu, I.nz);
    I.Sf.leftCols(nu).setIdentity();
    if (cfg_.single_trajectory) {
        I.Sn = I.Sf;
    } else {
        I.Sn = Mat::Zero(nu, I.nz);
        I.Sn.block(0, 0, m, m).setIdentity();
        I.Sn.block(m, nu, m * T, m * T).setIdentity();
    }

    // Cost on the nominal trajectory, written as 0.5 z'Pz + q'z.
    I.P = Mat::Zero(I.nz, I.nz);
    I.qx = Mat::Zero(I.nz, n);
    I.qg = Mat::Zero(I.nz, n);
    for (int k = 1; k <= T + 1; ++k) {
        const Mat& Qk = k == T + 1 ? cfg_.Qf : cfg_.Q;
        const Mat M = I.Gam[k] * I.Sn;
        I.P += 2.0 * M.transpose() * Qk * M;
        I.qx += 2.0 * M.transpose() * Qk * I.Phi[k];
        I.qg -= 2.0 * M.transpose() * Qk;
    }
    for (int k = 0; k <= T; ++k) {
        const Mat Sk = I.Sn.middleRows(k * m, m);
        I.P += 2.0 * Sk.transpose() * cfg_.R * Sk;
        if (k >= 1 && !cfg_.single_trajectory) {
            const Mat Fk = I.Sf.middleRows(k * m, m);
            I.P += 2.0 * cfg_.fallback_reg * Fk.transpose() * Fk;
        }
    }
    I.P = 0.5 * (I.P + I.P.transpose());

    // Constraints shared by every recovery set.
    std::vector<Mat> Gs;
    std::vector<Vec> h0s;
    std::vector<Mat> Hxs;
    auto add = [&](const Mat& G, const Vec& h0, const Mat& Hx) {
        Gs.push_back(G);
        h0s.push_back(h0);
        Hxs.push_back(Hx);
    };
    for (int k = 1; k <= T; ++k) {
        const auto& X = tubes_.X_tight[k];
        add(X.H() * I.Gam[k] * I.Sf, X.h(), -X.H() * I.Phi[k]);
    }
    for (int k = 0; k <= T; ++k) {
        const auto& U = tubes_.U_tight[k];
        add(U.H() * I.Sf.middleRows(k * m, m), U.h() - U.H() * cfg_.u_ref, Mat::Zero(U.num_facets(), n));
    }
    for (int k = 1; k <= T && !cfg_.single_trajectory; ++k) {
        const auto& U = cfg_.U;
        add(U.H() * I.Sn.middleRows(k * m, m), U.h() - U.H() * cfg_.u_ref, Mat::Zero(U.num_facets(), n));
    }
    for (std::size_t s = 0; s < cfg_.recovery.size(); ++s) {
        const auto& XR = tubes_.XR_tight[s];
        auto G = Gs;
        auto h0 = h0s;
        auto Hx = Hxs;
        G.push_back(XR.H() * I.Gam[T + 1] * I.Sf);
        h0.push_back(XR.h());
        Hx.push_back(-XR.H() * I.Phi[T + 1]);
        int rows = 0;
        for (const auto& g : G) rows += static_cast<int>(g.rows());
        SetQP qp;
        Mat Gall(rows, I.nz);
        qp.h0.resize(rows);
        qp.Hx.resize(rows, n);
        int r = 0;
        for (std::size_t b = 0; b < G.size(); ++b) {
            const auto nr = G[b].rows();
            Gall.middleRows(r, nr) = G[b];
            qp.h0.segment(r, nr) = h0[b];
            qp.Hx.middleRows(r, nr) = Hx[b];
            r += static_cast<int>(nr);
        }
        QPSettings st;
        st.warm_start = true;
        qp.solver = QPSolver(I.P, Gall, Mat(0, I.nz), st);
        I.qps.push_back(std::move(qp));
    }
}

TubeMPC::~TubeMPC() = default;
TubeMPC::TubeMPC(TubeMPC&&) noexcept = default;
TubeMPC& TubeMPC::operator=(TubeMPC&&) noexcept = default;

std::optional<MPCSolution> TubeMPC::solve(const Vec& xhat) { return solve(xhat, {}); }

std::optional<MPCSolution> TubeMPC::solve(const Vec& xhat, const std::vector<bool>& mask) {
    auto& I = *impl_;
    require_dims(xhat.size() == I.n, "TubeMPC::solve");
    if (!xhat.allFinite()) return std::nullopt;
    if (!contains(tubes_.X_tight[0], xhat)) return std::nullopt;
    const Vec q = I.qx * xhat + I.qg * cfg_.goal;
    std::optional<MPCSolution> best;
    for (std::size_t s = 0; s < I.qps.size(); ++s) {
        if (!mask.empty() && !mask.at(s)) continue;
        auto& qp = I.qps[s];
        const auto sol = qp.solver.solve(q, qp.h0 + qp.Hx * xhat, Vec(0));
        if (sol.status != QPStatus::Optimal) continue;
        MPCSolution out;
        out.recovery_index = static_cast<int>(s);
        out.qp_iterations = sol.iterations;
        const Vec uf = I.Sf * sol.z;
        const Vec un = I.Sn * sol.z;
        for (int k = 0; k <= I.T; ++k) {
            out.u_fb.push_back(cfg_.u_ref + uf.segment(k * I.m, I.m));
            out.u_nom.push_back(cfg_.u_ref + un.segment(k * I.m, I.m));
        }
        // u_nom[0] and u_fb[0] come from the same variable; make them bitwise equal.
        out.u_nom[0] = out.u_fb[0];
        double cost = 0.0;
        for (int k = 0; k <= I.T + 1; ++k) {
            out.x_fb.push_back(I.Phi[k] * xhat + I.Gam[k] * uf);
            out.x_nom.push_back(I.Phi[k] * xhat + I.Gam[k] * un);
            const Vec dx = out.x_nom.back() - cfg_.goal;
            cost += dx.dot((k == I.T + 1 ? cfg_.Qf : cfg_.Q) * dx);
            if (k <= I.T) {
                const Vec du = un.segment(k * I.m, I.m);
                cost += du.dot(cfg_.R * du);
                if (k >= 1 && !cfg_.single_trajectory) cost += cfg_.fallback_reg * uf.segment(k * I.m, I.m).squaredNorm();
                out.y_fb.push_back(cfg_.sys.C * out.x_fb.back());
            }
        }
        out.cost = cost;
        if (!best || out.cost < best->cost) best = std::move(out);
    }
    return best;
}

} // namespace fsmpc
