#include "fsmpc/linsys.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace fsmpc {

LinearSystem::LinearSystem(Mat A_, Mat B_, Mat C_, double dt_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), dt(dt_) {
    validate();
}

void LinearSystem::validate() const {
    require_dims(A.rows() == A.cols(), "LinearSystem: A must be square");
    require_dims(B.rows() == A.rows(), "LinearSystem: B rows");
    require_dims(C.cols() == A.rows(), "LinearSystem: C cols");
    if (!(dt > 0.0)) throw Error("LinearSystem: dt must be positive");
}

Mat LinearSystem::closed_loop(const Mat& K) const {
    require_dims(K.rows() == m() && K.cols() == r(), "closed_loop: K shape");
    return A + B * K * C;
}

void QuadrotorParams::validate() const {
    if (!(m > 0 && g > 0 && l > 0 && I > 0 && dt > 0))
        throw Error("QuadrotorParams: all parameters must be positive");
}

Vec QuadrotorParams::hover_input() const { return Vec::Constant(2, 0.5 * m * g); }

std::pair<Mat, Mat> euler_discretize(const Mat& A_c, const Mat& B_c, double dt) {
    require_dims(A_c.rows() == A_c.cols(), "euler_discretize: A_c square");
    require_dims(B_c.rows() == A_c.rows(), "euler_discretize: B_c rows");
    if (!(dt > 0.0)) throw Error("euler_discretize: dt must be positive");
    Mat A = Mat::Identity(A_c.rows(), A_c.cols()) + dt * A_c;
    Mat B = dt * B_c;
    return {A, B};
}

LinearSystem quadrotor_linear(const QuadrotorParams& p) {
    p.validate();
    Mat Ac = Mat::Zero(6, 6);
    Ac.block(0, 3, 3, 3).setIdentity();
    Ac(3, 2) = -p.g; // xdd = -(1/m) th (mg)
    Mat Bc = Mat::Zero(6, 2);
    Bc(4, 0) = Bc(4, 1) = 1.0 / p.m;
    Bc(5, 0) = p.l / p.I;
    Bc(5, 1) = -p.l / p.I;
    auto [A, B] = euler_discretize(Ac, Bc, p.dt);
    Mat C = Mat::Zero(4, 6);
    C.block(0, 2, 4, 4).setIdentity();
    return LinearSystem(A, B, C, p.dt);
}

Vec quadrotor_step(const QuadrotorParams& p, const Vec& x, const Vec& u) {
    require_dims(x.size() == 6 && u.size() == 2, "quadrotor_step");
    const double th = x(2);
    const double sum = u(0) + u(1);
    Vec xdot(6);
    xdot.head(3) = x.tail(3);
    xdot(3) = -std::sin(th) * sum / p.m;
    xdot(4) = std::cos(th) * sum / p.m - p.g;
    xdot(5) = p.l / p.I * (u(0) - u(1));
    return x + p.dt * xdot;
}

double spectral_radius(const Mat& A) {
    if (A.size() == 0) return 0.0;
    return Eigen::EigenSolver<Mat>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

Mat dlqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, int max_iter, double tol) {
    const auto n = A.rows();
    require_dims(A.cols() == n && B.rows() == n, "dlqr: A, B");
    require_dims(Q.rows() == n && Q.cols() == n, "dlqr: Q");
    require_dims(R.rows() == B.cols() && R.cols() == B.cols(), "dlqr: R");
    Mat P = Q;
    Mat K = Mat::Zero(B.cols(), n);
    for (int it = 0; it < max_iter; ++it) {
        const Mat S = R + B.transpose() * P * B;
        K = S.ldlt().solve(B.transpose() * P * A);
        Mat Pn = Q + A.transpose() * P * (A - B * K);
        Pn = 0.5 * (Pn + Pn.transpose());
        const double diff = (Pn - P).cwiseAbs().maxCoeff();
        P = std::move(Pn);
        if (!std::isfinite(diff)) break;
        if (diff <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
            K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
            if (spectral_radius(A - B * K) >= 1.0)
                throw NoConvergence("dlqr: closed loop not stable");
            return K;
        }
    }
    throw NoConvergence("dlqr: Riccati iteration did not converge");
}

} // namespace fsmpc
