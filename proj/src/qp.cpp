#include "fsmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fsmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

bool is_finite(double v) { return std::isfinite(v); }

} // namespace

const char* to_string(QPStatus s) {
    switch (s) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::Unbounded: return "unbounded";
    case QPStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

void QPProblem::validate() const {
    const auto n = q.size();
    require_dims(P.rows() == n && P.cols() == n, "QPProblem::P");
    require_dims(G.cols() == n || G.rows() == 0, "QPProblem::G");
    require_dims(G.rows() == h.size(), "QPProblem::h");
    require_dims(A_eq.cols() == n || A_eq.rows() == 0, "QPProblem::A_eq");
    require_dims(A_eq.rows() == b_eq.size(), "QPProblem::b_eq");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff()))
        throw Error("QPProblem: P is not symmetric");
}

QPSolver::QPSolver(const Mat& P, const Mat& G, const Mat& A_eq, QPSettings settings)
    : settings_(settings), n_(static_cast<int>(P.rows())), m_ineq_(static_cast<int>(G.rows())),
      m_eq_(static_cast<int>(A_eq.rows())), P_(P), rho_(settings.rho) {
    require_dims(P.cols() == n_, "QPSolver::P");
    require_dims(m_ineq_ == 0 || G.cols() == n_, "QPSolver::G");
    require_dims(m_eq_ == 0 || A_eq.cols() == n_, "QPSolver::A_eq");
    const int m = m_ineq_ + m_eq_;
    A_.resize(m, n_);
    if (m_ineq_ > 0) A_.topRows(m_ineq_) = G;
    if (m_eq_ > 0) A_.bottomRows(m_eq_) = A_eq;
    row_scale_ = Vec::Ones(m);
    for (int i = 0; i < m; ++i) {
        const double nrm = A_.row(i).norm();
        if (nrm > 0.0) {
            row_scale_(i) = 1.0 / nrm;
            A_.row(i) *= row_scale_(i);
        }
    }
    factorize();
}

void QPSolver::factorize() {
    const int m = m_ineq_ + m_eq_;
    rho_vec_.resize(m);
    for (int i = 0; i < m; ++i) rho_vec_(i) = i < m_ineq_ ? rho_ : 1e3 * rho_;
    Mat M = P_;
    M.diagonal().array() += settings_.sigma;
    M.noalias() += A_.transpose() * rho_vec_.asDiagonal() * A_;
    kkt_.compute(M);
}

void QPSolver::fill_solution(const Vec& x, const Vec& y, const Vec& q, const Vec& l,
                             const Vec& u, QPSolution& out) const {
    out.z = x;
    const Vec y_orig = row_scale_.cwiseProduct(y);
    out.lambda = y_orig.head(m_ineq_).cwiseMax(0.0);
    out.nu = y_orig.tail(m_eq_);
    Vec Ax = A_ * x;
    double prim = 0.0;
    double gap = 0.0;
    for (int i = 0; i < Ax.size(); ++i) {
        const double viol = std::max(is_finite(l(i)) ? l(i) - Ax(i) : 0.0,
                                     is_finite(u(i)) ? Ax(i) - u(i) : 0.0);
        prim = std::max(prim, std::max(viol, 0.0) / row_scale_(i));
        if (i < m_ineq_ && is_finite(u(i)))
            gap = std::max(gap, std::abs(out.lambda(i) * (Ax(i) - u(i)) / row_scale_(i)));
    }
    Vec stat = P_ * x + q;
    if (m_ineq_ > 0) stat.noalias() += A_.topRows(m_ineq_).transpose() *
                                       (out.lambda.cwiseQuotient(row_scale_.head(m_ineq_)));
    if (m_eq_ > 0) stat.noalias() += A_.bottomRows(m_eq_).transpose() *
                                     (out.nu.cwiseQuotient(row_scale_.tail(m_eq_)));
    out.residuals = {prim, inf_norm(stat), gap};
    out.objective = 0.5 * x.dot(P_ * x) + q.dot(x);
}

bool QPSolver::try_polish(const Vec& q, const Vec& l, const Vec& u, const Vec& y_admm,
                          const Vec& z_admm, QPSolution& out) const {
    const int m = m_ineq_ + m_eq_;
    std::vector<char> is_active(m, 0);
    for (int i = 0; i < m; ++i) {
        if (A_.row(i).squaredNorm() == 0.0) continue;
        if (i >= m_ineq_)
            is_active[i] = 1;
        else if (is_finite(u(i)) && u(i) - z_admm(i) < y_admm(i))
            is_active[i] = 1;
    }
    const double tol = settings_.tol;
    constexpr double delta = 1e-9;
    // A few rounds of primal active-set correction around the ADMM guess.
    for (int round = 0; round < 6; ++round) {
        std::vector<int> active;
        for (int i = 0; i < m; ++i)
            if (is_active[i]) active.push_back(i);
        const int na = static_cast<int>(active.size());
        const int dim = n_ + na;
        Mat K = Mat::Zero(dim, dim);
        K.topLeftCorner(n_, n_) = P_;
        for (int j = 0; j < na; ++j) {
            K.block(n_ + j, 0, 1, n_) = A_.row(active[j]);
            K.block(0, n_ + j, n_, 1) = A_.row(active[j]).transpose();
        }
        Mat Kreg = K;
        Kreg.topLeftCorner(n_, n_).diagonal().array() += delta;
        for (int j = 0; j < na; ++j) Kreg(n_ + j, n_ + j) = -delta;
        Eigen::PartialPivLU<Mat> lu(Kreg);
        Vec rhs(dim);
        rhs.head(n_) = -q;
        for (int j = 0; j < na; ++j) rhs(n_ + j) = u(active[j]);
        Vec sol = lu.solve(rhs);
        for (int it = 0; it < 15; ++it) {
            const Vec r = rhs - K * sol;
            if (inf_norm(r) < 1e-14 * std::max(1.0, inf_norm(rhs))) break;
            sol += lu.solve(r);
        }
        if (!sol.allFinite()) return false;
        Vec x = sol.head(n_);
        Vec y = Vec::Zero(m);
        for (int j = 0; j < na; ++j) y(active[j]) = sol(n_ + j);

        bool changed = false;
        for (int j = 0; j < na; ++j) {
            const int i = active[j];
            if (i < m_ineq_ && y(i) < -tol) {
                is_active[i] = 0;
                changed = true;
            }
        }
        if (!changed) {
            const Vec Ax = A_ * x;
            for (int i = 0; i < m_ineq_; ++i) {
                if (!is_active[i] && is_finite(u(i)) && A_.row(i).squaredNorm() > 0.0 &&
                    Ax(i) - u(i) > tol) {
                    is_active[i] = 1;
                    changed = true;
                }
            }
        }
        if (changed) continue;
        QPSolution cand;
        fill_solution(x, y, q, l, u, cand);
        if (cand.residuals.primal > tol || cand.residuals.dual > tol ||
            cand.residuals.gap > tol)
            return false;
        cand.status = QPStatus::Optimal;
        cand.polished = true;
        out = std::move(cand);
        return true;
    }
    return false;
}

bool QPSolver::try_infeasibility(const Vec& dy, const Vec& l, const Vec& u, Vec& cert) const {
    const double scale = inf_norm(dy);
    if (!(scale > 0.0)) return false;
    const int m = m_ineq_ + m_eq_;
    std::vector<int> support;
    for (int i = 0; i < m; ++i) {
        const double v = dy(i) / scale;
        if (std::abs(v) < 1e-7) continue;
        if (v > 0.0 && !is_finite(u(i))) continue;
        if (v < 0.0 && !is_finite(l(i))) continue;
        support.push_back(i);
    }
    if (support.empty()) return false;
    const int s = static_cast<int>(support.size());
    Mat M(n_, s);
    Vec v(s);
    for (int j = 0; j < s; ++j) {
        M.col(j) = A_.row(support[j]).transpose();
        v(j) = dy(support[j]) / scale;
    }
    // Project onto null(M) so that A' y = 0 holds to rounding.
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
    Vec w = cod.solve(M * v);
    Vec vh = v - w;
    for (int it = 0; it < 3; ++it) vh -= cod.solve(M * vh);
    const double vnorm = inf_norm(vh);
    if (!(vnorm > 1e-12)) return false;
    double sigma = 0.0;
    double bound_scale = 1.0;
    for (int j = 0; j < s; ++j) {
        const int i = support[j];
        if (vh(j) * v(j) < 0.0 && std::abs(vh(j)) > 1e-12 * vnorm) return false;
        if (vh(j) > 0.0) {
            sigma += u(i) * vh(j);
            bound_scale = std::max(bound_scale, std::abs(u(i)));
        } else if (vh(j) < 0.0) {
            sigma += l(i) * vh(j);
            bound_scale = std::max(bound_scale, std::abs(l(i)));
        }
    }
    const double resid = inf_norm(M * vh);
    if (resid > settings_.infeas_tol * vnorm) return false;
    if (!(sigma < -settings_.infeas_tol * vnorm * bound_scale * s)) return false;
    cert = Vec::Zero(m);
    for (int j = 0; j < s; ++j) cert(support[j]) = row_scale_(support[j]) * vh(j) / vnorm;
    return true;
}

bool QPSolver::try_unbounded(const Vec& dx, const Vec& q, const Vec& l, const Vec& u) const {
    const double nx = inf_norm(dx);
    if (!(nx > 0.0)) return false;
    const Vec d = dx / nx;
    constexpr double eps = 1e-7;
    if (inf_norm(P_ * d) > eps) return false;
    if (!(q.dot(d) < -eps)) return false;
    const Vec Ad = A_ * d;
    for (int i = 0; i < Ad.size(); ++i) {
        if (is_finite(u(i)) && Ad(i) > eps) return false;
        if (is_finite(l(i)) && Ad(i) < -eps) return false;
    }
    return true;
}

QPSolution QPSolver::solve(const Vec& q_in, const Vec& h, const Vec& b_eq) {
    require_dims(q_in.size() == n_, "QPSolver::solve q");
    require_dims(h.size() == m_ineq_, "QPSolver::solve h");
    require_dims(b_eq.size() == m_eq_, "QPSolver::solve b_eq");
    const int m = m_ineq_ + m_eq_;
    const Vec& q = q_in;
    Vec l(m), u(m);
    for (int i = 0; i < m_ineq_; ++i) {
        l(i) = -kInf;
        u(i) = is_finite(h(i)) ? h(i) * row_scale_(i) : kInf;
    }
    for (int i = 0; i < m_eq_; ++i) {
        const int r = m_ineq_ + i;
        l(r) = u(r) = b_eq(i) * row_scale_(r);
    }

    QPSolution out;
    // Rows with no variable dependence are decided directly.
    for (int i = 0; i < m; ++i) {
        if (A_.row(i).squaredNorm() != 0.0) continue;
        const bool bad = (is_finite(u(i)) && u(i) < -settings_.tol) ||
                         (is_finite(l(i)) && l(i) > settings_.tol);
        if (bad) {
            out.status = QPStatus::Infeasible;
            out.z = Vec::Zero(n_);
            out.lambda = Vec::Zero(m_ineq_);
            out.nu = Vec::Zero(m_eq_);
            out.certificate = Vec::Zero(m);
            out.certificate(i) = (is_finite(u(i)) && u(i) < 0.0) ? 1.0 : -1.0;
            return out;
        }
    }

    Vec x = Vec::Zero(n_), z = Vec::Zero(m), y = Vec::Zero(m);
    if (settings_.warm_start && has_prev_) {
        x = x_prev_;
        z = z_prev_;
        y = y_prev_;
    }
    if (std::abs(rho_ - settings_.rho) > 0.0 && !(settings_.warm_start && has_prev_)) {
        rho_ = settings_.rho;
        factorize();
    }

    const double tol = settings_.tol;
    Vec x_tilde(n_), z_tilde(m), z_relax(m), rhs(n_);
    Vec x_chk = x, y_chk = y;
    int k = 0;
    bool converged = false;
    for (k = 1; k <= settings_.max_iter; ++k) {
        rhs = settings_.sigma * x - q;
        if (m > 0) rhs.noalias() += A_.transpose() * (rho_vec_.cwiseProduct(z) - y);
        x_tilde = kkt_.solve(rhs);
        z_tilde.noalias() = A_ * x_tilde;
        x = settings_.alpha * x_tilde + (1.0 - settings_.alpha) * x;
        z_relax = settings_.alpha * z_tilde + (1.0 - settings_.alpha) * z;
        z = (z_relax + y.cwiseQuotient(rho_vec_)).cwiseMax(l).cwiseMin(u);
        y += rho_vec_.cwiseProduct(z_relax - z);

        if (k % settings_.check_every != 0 && k != settings_.max_iter) continue;

        const Vec Ax = A_ * x;
        const Vec Px = P_ * x;
        const Vec Aty = A_.transpose() * y;
        const double r_prim = inf_norm(Ax - z);
        const double r_dual = inf_norm(Px + q + Aty);
        const double n_prim = std::max(inf_norm(Ax), inf_norm(z));
        const double n_dual = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q)});

        if (k % settings_.polish_every == 0 && try_polish(q, l, u, y, z, out)) {
            converged = true;
            break;
        }
        if (r_prim <= tol + tol * n_prim && r_dual <= tol + tol * n_dual) {
            if (!try_polish(q, l, u, y, z, out)) {
                fill_solution(x, y, q, l, u, out);
                out.status = QPStatus::Optimal;
            }
            converged = true;
            break;
        }

        const Vec dy = y - y_chk;
        const Vec dx = x - x_chk;
        Vec cert;
        if (inf_norm(dy) > 1e-9 && try_infeasibility(dy, l, u, cert)) {
            out.status = QPStatus::Infeasible;
            out.certificate = cert;
            out.z = x;
            out.lambda = Vec::Zero(m_ineq_);
            out.nu = Vec::Zero(m_eq_);
            out.iterations = k;
            has_prev_ = false;
            return out;
        }
        if (inf_norm(dx) > 1e-9 && try_unbounded(dx, q, l, u)) {
            out.status = QPStatus::Unbounded;
            out.z = x;
            out.lambda = Vec::Zero(m_ineq_);
            out.nu = Vec::Zero(m_eq_);
            out.iterations = k;
            has_prev_ = false;
            return out;
        }
        x_chk = x;
        y_chk = y;

        if (settings_.adaptive_rho && k % (5 * settings_.check_every) == 0 && m > 0) {
            const double pr = r_prim / std::max(n_prim, 1e-12);
            const double du = r_dual / std::max(n_dual, 1e-12);
            double ratio = std::sqrt(pr / std::max(du, 1e-30));
            const double rho_new = std::clamp(rho_ * ratio, 1e-6, 1e6);
            if (rho_new > 5.0 * rho_ || rho_new < 0.2 * rho_) {
                rho_ = rho_new;
                factorize();
            }
        }
    }
    if (!converged) {
        fill_solution(x, y, q, l, u, out);
        out.status = QPStatus::MaxIter;
        k = settings_.max_iter;
    }
    out.iterations = k;
    if (settings_.warm_start) {
        x_prev_ = x;
        z_prev_ = z;
        y_prev_ = y;
        has_prev_ = true;
    }
    return out;
}

QPSolution solve_qp(const QPProblem& prob, double tol, int max_iter) {
    prob.validate();
    const auto n = prob.num_vars();
    QPSettings s;
    s.tol = tol;
    s.max_iter = max_iter;
    Mat G = prob.G.rows() == 0 ? Mat(0, n) : prob.G;
    Mat Aeq = prob.A_eq.rows() == 0 ? Mat(0, n) : prob.A_eq;
    QPSolver solver(prob.P, G, Aeq, s);
    return solver.solve(prob.q, prob.h, prob.b_eq);
}

QPSolution solve_lp(const Vec& c, const Mat& G, const Vec& h, double tol, int max_iter) {
    QPProblem prob;
    const auto n = c.size();
    prob.P = Mat::Zero(n, n);
    prob.q = c;
    prob.G = G;
    prob.h = h;
    prob.A_eq = Mat(0, n);
    prob.b_eq = Vec(0);
    return solve_qp(prob, tol, max_iter);
}

} // namespace fsmpc
