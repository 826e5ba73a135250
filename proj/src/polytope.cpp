#include "fsmpc/polytope.hpp"

#include "fsmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fsmpc {

namespace {

constexpr double kLpTol = 1e-10;

QPSolution feasibility_qp(const Mat& H, const Vec& h) {
    QPProblem prob;
    const auto n = H.cols();
    prob.P = Mat::Identity(n, n);
    prob.q = Vec::Zero(n);
    prob.G = H;
    prob.h = h;
    prob.A_eq = Mat(0, n);
    prob.b_eq = Vec(0);
    return solve_qp(prob, kLpTol, 50000);
}

} // namespace

// ---------------------------------------------------------------- HPolytope

HPolytope::HPolytope(Mat H, Vec h) : H_(std::move(H)), h_(std::move(h)) {
    require_dims(H_.rows() == h_.size(), "HPolytope(H, h)");
    for (int i = 0; i < H_.rows(); ++i)
        if (H_.row(i).squaredNorm() == 0.0) throw Error("HPolytope: zero facet normal");
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
    require_dims(lo.size() == hi.size(), "HPolytope::box");
    const auto n = lo.size();
    std::vector<std::pair<Vec, double>> rows;
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(hi(i))) rows.emplace_back(Vec::Unit(n, i), hi(i));
        if (std::isfinite(lo(i))) rows.emplace_back(-Vec::Unit(n, i), -lo(i));
    }
    Mat H(rows.size(), n);
    Vec h(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        H.row(r) = rows[r].first.transpose();
        h(r) = rows[r].second;
    }
    return HPolytope(std::move(H), std::move(h));
}

HPolytope HPolytope::universe(int dim) { return HPolytope(Mat(0, dim), Vec(0)); }

bool HPolytope::is_empty() const {
    if (num_facets() == 0) return false;
    const auto sol = feasibility_qp(H_, h_);
    if (sol.status == QPStatus::Infeasible) return true;
    if (sol.status == QPStatus::Optimal) return false;
    // Unconverged: fall back on the residual of the last iterate.
    return sol.residuals.primal > kMembershipTol;
}

std::optional<double> HPolytope::support(const Vec& d) const {
    require_dims(d.size() == dim(), "HPolytope::support");
    if (d.squaredNorm() == 0.0) {
        if (is_empty()) throw EmptyResult("support of an empty polytope");
        return 0.0;
    }
    const auto sol = solve_lp(-d, H_, h_, kLpTol);
    switch (sol.status) {
    case QPStatus::Optimal: return -sol.objective;
    case QPStatus::Unbounded: return std::nullopt;
    case QPStatus::Infeasible: throw EmptyResult("support of an empty polytope");
    case QPStatus::MaxIter: break;
    }
    throw Error("HPolytope::support: LP did not converge");
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
    require_dims(other.dim() == dim(), "HPolytope::intersect");
    Mat H(num_facets() + other.num_facets(), dim());
    Vec h(H.rows());
    H << H_, other.H_;
    h << h_, other.h_;
    return HPolytope(std::move(H), std::move(h));
}

HPolytope HPolytope::minimal() const {
    const int n = dim();
    std::vector<Vec> normals;
    std::vector<double> offsets;
    for (int i = 0; i < num_facets(); ++i) {
        const double nrm = H_.row(i).norm();
        Vec a = H_.row(i).transpose() / nrm;
        const double b = h_(i) / nrm;
        bool merged = false;
        for (std::size_t k = 0; k < normals.size(); ++k) {
            if ((normals[k] - a).lpNorm<Eigen::Infinity>() < 1e-12) {
                offsets[k] = std::min(offsets[k], b);
                merged = true;
                break;
            }
        }
        if (!merged) {
            normals.push_back(std::move(a));
            offsets.push_back(b);
        }
    }
    std::vector<char> keep(normals.size(), 1);
    for (std::size_t i = 0; i < normals.size(); ++i) {
        // Redundant if relaxing facet i by one unit does not let d.x exceed its offset.
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < normals.size(); ++k)
            if (keep[k] || k == i) idx.push_back(k);
        Mat H(idx.size(), n);
        Vec h(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            H.row(r) = normals[idx[r]].transpose();
            h(r) = offsets[idx[r]] + (idx[r] == i ? 1.0 : 0.0);
        }
        const auto sol = solve_lp(-normals[i], H, h, kLpTol);
        if (sol.status == QPStatus::Optimal && -sol.objective <= offsets[i] + 1e-10)
            keep[i] = 0;
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < normals.size(); ++i)
        if (keep[i]) kept.push_back(i);
    Mat H(kept.size(), n);
    Vec h(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        H.row(r) = normals[kept[r]].transpose();
        h(r) = offsets[kept[r]];
    }
    return HPolytope(std::move(H), std::move(h));
}

std::optional<Vec> HPolytope::interior_point() const {
    const int n = dim();
    if (num_facets() == 0) return Vec::Zero(n);
    // max r  s.t.  H_i x + r ||H_i|| <= h_i,  r <= 1
    Mat G(num_facets() + 1, n + 1);
    Vec g(num_facets() + 1);
    for (int i = 0; i < num_facets(); ++i) {
        G.row(i) << H_.row(i), H_.row(i).norm();
        g(i) = h_(i);
    }
    G.row(num_facets()).setZero();
    G(num_facets(), n) = 1.0;
    g(num_facets()) = 1.0;
    Vec c = Vec::Zero(n + 1);
    c(n) = -1.0;
    const auto sol = solve_lp(c, G, g, kLpTol);
    if (sol.status != QPStatus::Optimal || sol.z(n) < -kMembershipTol) return std::nullopt;
    return Vec(sol.z.head(n));
}

// ---------------------------------------------------------------- Zonotope

Zonotope::Zonotope(Vec center, Mat generators) : c_(std::move(center)), G_(std::move(generators)) {
    if (G_.cols() == 0) G_.resize(c_.size(), 0);
    require_dims(G_.rows() == c_.size(), "Zonotope(c, G)");
}

Zonotope Zonotope::point(const Vec& c) { return Zonotope(c, Mat(c.size(), 0)); }

Zonotope Zonotope::box(const Vec& c, const Vec& radii) {
    require_dims(c.size() == radii.size(), "Zonotope::box");
    std::vector<int> nz;
    for (int i = 0; i < radii.size(); ++i)
        if (radii(i) != 0.0) nz.push_back(i);
    Mat G = Mat::Zero(c.size(), static_cast<Eigen::Index>(nz.size()));
    for (std::size_t j = 0; j < nz.size(); ++j) G(nz[j], j) = std::abs(radii(nz[j]));
    return Zonotope(c, std::move(G));
}

Vec Zonotope::interval_radius() const {
    if (G_.cols() == 0) return Vec::Zero(dim());
    return G_.cwiseAbs().rowwise().sum();
}

Zonotope Zonotope::reduced() const {
    const double scale = G_.cols() == 0 ? 0.0 : G_.cwiseAbs().maxCoeff();
    std::vector<Vec> dirs;
    std::vector<Vec> merged;
    for (int j = 0; j < G_.cols(); ++j) {
        const Vec g = G_.col(j);
        const double nrm = g.norm();
        if (nrm <= 1e-15 * std::max(scale, 1e-300)) continue;
        Vec u = g / nrm;
        bool done = false;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const double cosang = dirs[k].dot(u);
            if (std::abs(std::abs(cosang) - 1.0) < 1e-13) {
                merged[k] += (cosang > 0.0 ? 1.0 : -1.0) * g;
                done = true;
                break;
            }
        }
        if (!done) {
            dirs.push_back(std::move(u));
            merged.push_back(g);
        }
    }
    Mat G(dim(), static_cast<Eigen::Index>(merged.size()));
    for (std::size_t k = 0; k < merged.size(); ++k) G.col(k) = merged[k];
    return Zonotope(c_, std::move(G));
}

double support(const Zonotope& Z, const Vec& d) {
    require_dims(d.size() == Z.dim(), "support(Zonotope, d)");
    double s = d.dot(Z.center());
    if (Z.num_generators() > 0) s += (Z.generators().transpose() * d).cwiseAbs().sum();
    return s;
}

Zonotope affine_map(const Zonotope& Z, const Mat& M) {
    require_dims(M.cols() == Z.dim(), "affine_map");
    Mat G = Z.num_generators() > 0 ? Mat(M * Z.generators()) : Mat(M.rows(), 0);
    return Zonotope(M * Z.center(), std::move(G));
}

Zonotope mink_sum(const Zonotope& a, const Zonotope& b) {
    require_dims(a.dim() == b.dim(), "mink_sum");
    Mat G(a.dim(), a.num_generators() + b.num_generators());
    G << a.generators(), b.generators();
    return Zonotope(a.center() + b.center(), std::move(G)).reduced();
}

Zonotope translate(const Zonotope& Z, const Vec& offset) {
    require_dims(offset.size() == Z.dim(), "translate");
    return Zonotope(Z.center() + offset, Z.generators());
}

TightenedSet pont_diff(const HPolytope& X, const Zonotope& Z) {
    require_dims(X.dim() == Z.dim(), "pont_diff");
    Vec h = X.h();
    for (int i = 0; i < X.num_facets(); ++i) h(i) -= support(Z, X.H().row(i).transpose());
    TightenedSet out{HPolytope(X.H(), std::move(h)), false};
    out.empty = out.set.is_empty();
    return out;
}

bool contains(const HPolytope& X, const Vec& p, double tol) {
    require_dims(p.size() == X.dim(), "contains");
    if (X.num_facets() == 0) return true;
    return ((X.H() * p - X.h()).array() <= tol).all();
}

bool contains_z(const Zonotope& Z, const Vec& p, double tol) {
    require_dims(p.size() == Z.dim(), "contains_z");
    const Vec r = p - Z.center();
    const int k = Z.num_generators();
    if (k == 0) return r.lpNorm<Eigen::Infinity>() <= tol;
    QPProblem prob;
    prob.P = Mat::Identity(k, k);
    prob.q = Vec::Zero(k);
    prob.G.resize(2 * k, k);
    prob.G << Mat::Identity(k, k), -Mat::Identity(k, k);
    prob.h = Vec::Ones(2 * k);
    prob.A_eq = Z.generators();
    prob.b_eq = r;
    const auto sol = solve_qp(prob, 1e-11, 50000);
    if (sol.status == QPStatus::Infeasible) return false;
    return sol.residuals.primal <= tol;
}

bool verify_rpi(const HPolytope& omega, const Mat& A_cl, const Zonotope& D, double tol) {
    require_dims(A_cl.rows() == omega.dim() && A_cl.cols() == omega.dim(), "verify_rpi A_cl");
    require_dims(D.dim() == omega.dim(), "verify_rpi D");
    if (omega.is_empty()) throw EmptyResult("verify_rpi: empty set");
    for (int i = 0; i < omega.num_facets(); ++i) {
        const Vec row = omega.H().row(i).transpose();
        const Vec dir = A_cl.transpose() * row;
        const auto best = omega.support(dir);
        if (!best) throw Error("verify_rpi: set unbounded in a required direction");
        if (*best + support(D, row) > omega.h()(i) + tol) return false;
    }
    return true;
}

RpiResult max_rpi(const HPolytope& X, const Mat& A_cl, const Zonotope& D, int max_iter, double tol) {
    const int n = X.dim();
    require_dims(A_cl.rows() == n && A_cl.cols() == n, "max_rpi A_cl");
    require_dims(D.dim() == n, "max_rpi D");
    if (X.is_empty()) throw EmptyResult("max_rpi: X is empty");
    for (int i = 0; i < n; ++i)
        if (!X.support(Vec::Unit(n, i)) || !X.support(-Vec::Unit(n, i)))
            throw Error("max_rpi: X must be bounded");

    RpiResult res;
    HPolytope omega = X.minimal();
    for (int it = 1; it <= max_iter; ++it) {
        res.iterations = it;
        std::vector<Vec> new_rows;
        std::vector<double> new_off;
        for (int i = 0; i < omega.num_facets(); ++i) {
            const Vec row = omega.H().row(i).transpose();
            const Vec a = A_cl.transpose() * row;
            const double b = omega.h()(i) - support(D, row);
            if (a.norm() <= 1e-14) {
                if (b < -tol) {
                    res.set = omega;
                    res.status = RpiStatus::Empty;
                    return res;
                }
                continue;
            }
            const auto best = omega.support(a);
            if (!best) throw Error("max_rpi: unbounded iterate");
            if (*best > b + tol) {
                new_rows.push_back(a);
                new_off.push_back(b);
            }
        }
        if (new_rows.empty()) {
            res.set = omega;
            res.status = RpiStatus::Converged;
            res.certified = verify_rpi(omega, A_cl, D, std::max(tol, kMembershipTol));
            return res;
        }
        Mat H(omega.num_facets() + static_cast<int>(new_rows.size()), n);
        Vec h(H.rows());
        H.topRows(omega.num_facets()) = omega.H();
        h.head(omega.num_facets()) = omega.h();
        for (std::size_t r = 0; r < new_rows.size(); ++r) {
            H.row(omega.num_facets() + r) = new_rows[r].transpose();
            h(omega.num_facets() + r) = new_off[r];
        }
        HPolytope next(std::move(H), std::move(h));
        if (next.is_empty()) {
            res.set = next;
            res.status = RpiStatus::Empty;
            return res;
        }
        omega = next.minimal();
    }
    res.set = omega;
    res.status = RpiStatus::MaxIterExceeded;
    return res;
}

Vec sample(const Zonotope& Z, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec xi(Z.num_generators());
    for (int j = 0; j < xi.size(); ++j) xi(j) = unit(rng);
    if (Z.num_generators() == 0) return Z.center();
    return Z.center() + Z.generators() * xi;
}

// ---------------------------------------------------------------- ErrorSet

ErrorSet ErrorSet::box(const Vec& radii) {
    if ((radii.array() < 0.0).any()) throw Error("ErrorSet::box: negative radius");
    ErrorSet e;
    e.hpoly = HPolytope::box(-radii, radii);
    e.zono = Zonotope::box(Vec::Zero(radii.size()), radii);
    e.exact = true;
    return e;
}

ErrorSet ErrorSet::from_norm_bound(const Mat& A, double alpha) {
    if (!(alpha >= 0.0)) throw Error("ErrorSet: alpha must be nonnegative");
    const auto n = A.cols();
    Mat H(2 * A.rows(), n);
    H << A, -A;
    ErrorSet e;
    e.hpoly = HPolytope(H, Vec::Constant(H.rows(), alpha));
    if (A.rows() == n) {
        Eigen::FullPivLU<Mat> lu(A);
        if (lu.isInvertible()) {
            e.zono = Zonotope(Vec::Zero(n), alpha * lu.inverse()).reduced();
            e.exact = true;
            return e;
        }
    }
    // Conservative: bounding box of the H-form.
    Vec r(n);
    for (int i = 0; i < n; ++i) {
        const auto s = e.hpoly.support(Vec::Unit(n, i));
        if (!s) throw Error("ErrorSet: error set must be bounded");
        r(i) = *s;
    }
    e.zono = Zonotope::box(Vec::Zero(n), r);
    e.exact = false;
    return e;
}

} // namespace fsmpc
