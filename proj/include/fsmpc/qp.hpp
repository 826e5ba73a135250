#pragma once

#include "fsmpc/types.hpp"

#include <limits>
#include <optional>

namespace fsmpc {

/// min 0.5 z'Pz + q'z  s.t.  G z <= h,  A_eq z = b_eq.
/// Rows of h may be +inf (ignored).
struct QPProblem {
    Mat P;
    Vec q;
    Mat G;
    Vec h;
    Mat A_eq;
    Vec b_eq;

    int num_vars() const { return static_cast<int>(q.size()); }
    /// Throws DimensionMismatch / Error if malformed.
    void validate() const;
};

enum class QPStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* to_string(QPStatus s);

struct QPResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

struct QPSolution {
    Vec z;
    Vec lambda; ///< inequality duals, >= 0
    Vec nu;     ///< equality duals
    QPStatus status = QPStatus::MaxIter;
    QPResiduals residuals;
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool polished = false;
    /// Farkas direction y (over [G; A_eq] rows) when status == Infeasible.
    Vec certificate;
};

struct QPSettings {
    double tol = 1e-8;
    int max_iter = 20000;
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;
    /// Relative residual for accepting an infeasibility certificate.
    double infeas_tol = 1e-10;
    int check_every = 10;
    int polish_every = 20;
    bool adaptive_rho = true;
    bool warm_start = false;
};

/// ADMM solver with cached factorizations. P, G and A_eq are fixed at setup;
/// q, h and b_eq may change between solves (the MPC reuses one instance per
/// recovery set). Not thread-safe: one instance per concurrent solve.
class QPSolver {
public:
    QPSolver() = default;
    QPSolver(const Mat& P, const Mat& G, const Mat& A_eq, QPSettings settings = {});

    QPSolution solve(const Vec& q, const Vec& h, const Vec& b_eq);

    const QPSettings& settings() const { return settings_; }
    QPSettings& settings() { return settings_; }
    int num_vars() const { return n_; }

private:

    void factorize();
    bool try_polish(const Vec& q, const Vec& l, const Vec& u, const Vec& y_admm,
                    const Vec& z_admm, QPSolution& out) const;
    bool try_infeasibility(const Vec& dy, const Vec& l, const Vec& u, Vec& cert) const;
    bool try_unbounded(const Vec& dx, const Vec& q, const Vec& l, const Vec& u) const;
    void fill_solution(const Vec& x, const Vec& y, const Vec& q, const Vec& l,
                       const Vec& u, QPSolution& out) const;

    QPSettings settings_;
    int n_ = 0;
    int m_ineq_ = 0;
    int m_eq_ = 0;
    Mat P_;
    Mat A_;        ///< scaled [G; A_eq]
    Vec row_scale_; ///< A_ = diag(row_scale_) * [G; A_eq]
    Vec rho_vec_;
    double rho_ = 0.1;
    Eigen::LLT<Mat> kkt_;
    Vec x_prev_, z_prev_, y_prev_;
    bool has_prev_ = false;
};

/// One-shot convenience wrapper.
QPSolution solve_qp(const QPProblem& prob, double tol = 1e-8, int max_iter = 20000);

/// min c'x s.t. Gx <= h (LP through the same solver).
QPSolution solve_lp(const Vec& c, const Mat& G, const Vec& h, double tol = 1e-9,
                    int max_iter = 50000);

} // namespace fsmpc
