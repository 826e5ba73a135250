#include "fsmpc/baselines.hpp"

#include <vector>

namespace fsmpc {

MPCConfig naive_config(const MPCConfig& cfg) {
    MPCConfig out = cfg;
    out.single_trajectory = true;
    out.recovery = {{"none", HPolytope::universe(cfg.sys.n()), RecoveryPolicy::zero()}};
    return out;
}

std::optional<MPCSolution> soft_fallback_plan(const MPCConfig& cfg, const TubeSets& tubes,
                                              const Vec& xhat, double slack_weight) {
    const int n = cfg.sys.n(), m = cfg.sys.m(), T = cfg.T;
    const int nu = m * (T + 1);
    const auto& A = cfg.sys.A;
    const auto& B = cfg.sys.B;
    std::vector<Mat> Phi{Mat::Identity(n, n)};
    std::vector<Mat> Gam{Mat::Zero(n, nu)};
    for (int k = 0; k <= T; ++k) {
        Phi.push_back(A * Phi.back());
        Mat G = A * Gam.back();
        G.block(0, k * m, n, m) += B;
        Gam.push_back(std::move(G));
    }

    std::optional<MPCSolution> best;
    for (std::size_t s = 0; s < cfg.recovery.size(); ++s) {
        // Softened rows: (G_soft v - slack <= h_soft), hard rows: (G_hard v <= h_hard).
        std::vector<std::pair<Mat, Vec>> soft, hard;
        for (int k = 0; k <= T; ++k) {
            const auto& X = tubes.X_tight[k];
            soft.emplace_back(X.H() * Gam[k], X.h() - X.H() * Phi[k] * xhat);
            const auto& U = tubes.U_tight[k];
            Mat Gu = Mat::Zero(U.num_facets(), nu);
            Gu.middleCols(k * m, m) = U.H();
            hard.emplace_back(Gu, U.h() - U.H() * cfg.u_ref);
        }
        const auto& XR = tubes.XR_tight[s];
        soft.emplace_back(XR.H() * Gam[T + 1], XR.h() - XR.H() * Phi[T + 1] * xhat);

        int ns = 0, nh = 0;
        for (const auto& b : soft) ns += static_cast<int>(b.first.rows());
        for (const auto& b : hard) nh += static_cast<int>(b.first.rows());
        const int nz = nu + ns;
        QPProblem prob;
        prob.P = Mat::Zero(nz, nz);
        prob.P.topLeftCorner(nu, nu) = 2.0 * cfg.fallback_reg * Mat::Identity(nu, nu);
        prob.P.bottomRightCorner(ns, ns) = 2.0 * slack_weight * Mat::Identity(ns, ns);
        prob.q = Vec::Zero(nz);
        prob.q.tail(ns).setConstant(slack_weight);
        prob.G = Mat::Zero(ns + nh + ns, nz);
        prob.h = Vec::Zero(prob.G.rows());
        int r = 0;
        for (const auto& [G, h] : soft) {
            prob.G.block(r, 0, G.rows(), nu) = G;
            prob.G.block(r, nu + r, G.rows(), G.rows()) = -Mat::Identity(G.rows(), G.rows());
            prob.h.segment(r, G.rows()) = h;
            r += static_cast<int>(G.rows());
        }
        for (const auto& [G, h] : hard) {
            prob.G.block(r, 0, G.rows(), nu) = G;
            prob.h.segment(r, G.rows()) = h;
            r += static_cast<int>(G.rows());
        }
        prob.G.block(r, nu, ns, ns) = -Mat::Identity(ns, ns);
        prob.A_eq = Mat(0, nz);
        prob.b_eq = Vec(0);
        const auto sol = solve_qp(prob, 1e-8, 20000);
        if (sol.status != QPStatus::Optimal) continue;

        MPCSolution out;
        out.recovery_index = static_cast<int>(s);
        out.cost = sol.objective;
        out.qp_iterations = sol.iterations;
        const Vec v = sol.z.head(nu);
        for (int k = 0; k <= T + 1; ++k) {
            out.x_fb.push_back(Phi[k] * xhat + Gam[k] * v);
            if (k <= T) {
                out.u_fb.push_back(cfg.u_ref + v.segment(k * m, m));
                out.y_fb.push_back(cfg.sys.C * out.x_fb.back());
            }
        }
        out.u_nom = out.u_fb;
        out.x_nom = out.x_fb;
        if (!best || out.cost < best->cost) best = std::move(out);
    }
    return best;
}

} // namespace fsmpc
