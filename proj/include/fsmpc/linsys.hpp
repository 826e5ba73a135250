#pragma once

#include "fsmpc/types.hpp"

#include <utility>

namespace fsmpc {

class NoConvergence : public Error {
public:
    using Error::Error;
};

/// x+ = A x + B u + w, with fallback measurement y = C x.
struct LinearSystem {
    Mat A, B, C;
    double dt = 0.0;

    LinearSystem() = default;
    /// Validates shapes and dt > 0.
    LinearSystem(Mat A, Mat B, Mat C, double dt);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int r() const { return static_cast<int>(C.rows()); }
    void validate() const;
    /// A + B K C for an output-feedback gain K (m x r).
    Mat closed_loop(const Mat& K) const;
};

struct QuadrotorParams {
    double m = 1.0;
    double g = 9.81;
    double l = 0.3;
    double I = 0.2 * 1.0 * 0.3 * 0.3;
    double dt = 0.15;

    void validate() const;
    /// (mg/2, mg/2): per-rotor thrust that balances gravity.
    Vec hover_input() const;
};

/// A = I + dt A_c, B = dt B_c.
std::pair<Mat, Mat> euler_discretize(const Mat& A_c, const Mat& B_c, double dt);

/// State [x, y, th, xd, yd, thd], input [u_f, u_r] as deviation from hover,
/// C picks [th, xd, yd, thd].
LinearSystem quadrotor_linear(const QuadrotorParams& p);

/// One Euler step of the nonlinear planar quadrotor (absolute thrusts).
Vec quadrotor_step(const QuadrotorParams& p, const Vec& x, const Vec& u);

/// Infinite-horizon discrete LQR gain with u = -K x.
/// Throws NoConvergence if the Riccati iteration stalls or the loop is not stable.
Mat dlqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, int max_iter = 100000,
         double tol = 1e-12);

double spectral_radius(const Mat& A);

} // namespace fsmpc
