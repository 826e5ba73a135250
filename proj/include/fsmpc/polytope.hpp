#pragma once

#include "fsmpc/types.hpp"

#include <optional>
#include <random>

namespace fsmpc {

/// Facet tolerance used by every membership test.
inline constexpr double kMembershipTol = 1e-9;

class EmptyResult : public Error {
public:
    using Error::Error;
};

/// {x : H x <= h}. Unbounded sets are allowed; emptiness is decided by LP.
class HPolytope {
public:
    HPolytope() = default;
    /// Throws DimensionMismatch on inconsistent shapes and Error on zero rows.
    HPolytope(Mat H, Vec h);

    /// Axis-aligned box lo <= x <= hi. Infinite bounds drop the facet.
    static HPolytope box(const Vec& lo, const Vec& hi);
    /// The whole space R^dim (no facets).
    static HPolytope universe(int dim);

    const Mat& H() const { return H_; }
    const Vec& h() const { return h_; }
    int dim() const { return static_cast<int>(H_.cols()); }
    int num_facets() const { return static_cast<int>(H_.rows()); }

    bool is_empty() const;
    /// sup_{x in P} d.x; nullopt when unbounded. Throws EmptyResult if empty.
    std::optional<double> support(const Vec& d) const;
    /// Facets of both sets stacked.
    HPolytope intersect(const HPolytope& other) const;
    /// Rows normalized to unit norm, exact duplicates and LP-redundant rows removed.
    HPolytope minimal() const;
    /// Some point of the set (Chebyshev-like center for bounded sets); nullopt if empty.
    std::optional<Vec> interior_point() const;

private:
    Mat H_;
    Vec h_;
};

/// {c + G xi : ||xi||_inf <= 1}. Zero generators represent the singleton {c}.
class Zonotope {
public:
    Zonotope() = default;
    Zonotope(Vec center, Mat generators);

    static Zonotope point(const Vec& c);
    /// Box with per-coordinate half-widths (zero radius allowed) around c.
    static Zonotope box(const Vec& c, const Vec& radii);

    const Vec& center() const { return c_; }
    const Mat& generators() const { return G_; }
    int dim() const { return static_cast<int>(c_.size()); }
    int num_generators() const { return static_cast<int>(G_.cols()); }

    /// Half-widths of the axis-aligned bounding box.
    Vec interval_radius() const;
    /// Merge parallel generators and drop zero columns (exact).
    Zonotope reduced() const;

private:
    Vec c_;
    Mat G_;
};

/// Exact support value sup_{z in Z} d.z.
double support(const Zonotope& Z, const Vec& d);
Zonotope affine_map(const Zonotope& Z, const Mat& M);
/// Exact Minkowski sum; parallel generators are merged.
Zonotope mink_sum(const Zonotope& a, const Zonotope& b);
Zonotope translate(const Zonotope& Z, const Vec& offset);

struct TightenedSet {
    HPolytope set;
    bool empty = false;
};

/// X minus Z in the Pontryagin sense: every facet offset shrinks by support(Z, H_i).
TightenedSet pont_diff(const HPolytope& X, const Zonotope& Z);

bool contains(const HPolytope& X, const Vec& p, double tol = kMembershipTol);
/// Decided by the LP  G xi = p - c, ||xi||_inf <= 1.
bool contains_z(const Zonotope& Z, const Vec& p, double tol = kMembershipTol);

/// Checks A_cl * Omega + D subset of Omega row by row with one LP per facet.
/// Throws Error if an LP fails or Omega is unbounded in a required direction.
bool verify_rpi(const HPolytope& omega, const Mat& A_cl, const Zonotope& D,
                double tol = kMembershipTol);

enum class RpiStatus { Converged, MaxIterExceeded, Empty };

struct RpiResult {
    HPolytope set;
    RpiStatus status = RpiStatus::MaxIterExceeded;
    bool certified = false; ///< converged and verify_rpi passed
    int iterations = 0;
};

/// Maximal robust positive invariant subset of X for x+ = A_cl x + d, d in D.
/// X must be nonempty and bounded.
RpiResult max_rpi(const HPolytope& X, const Mat& A_cl, const Zonotope& D, int max_iter = 200,
                  double tol = 1e-8);

/// c + G xi with xi uniform on the unit box.
Vec sample(const Zonotope& Z, std::mt19937_64& rng);

/// Perception error set  {e : ||A e||_inf <= alpha}  kept in both representations:
/// the H-form for membership and a zonotope for tube arithmetic.
struct ErrorSet {
    HPolytope hpoly;
    Zonotope zono;
    bool exact = true; ///< zonotope equals the H-form (false: outer bound)

    /// Box with half-widths r (zero entries pin the coordinate).
    static ErrorSet box(const Vec& radii);
    /// ||A e||_inf <= alpha. Exact parallelotope for invertible A, bounding box otherwise.
    static ErrorSet from_norm_bound(const Mat& A, double alpha);

    bool contains(const Vec& e) const { return fsmpc::contains(hpoly, e); }
    int dim() const { return hpoly.dim(); }
};

} // namespace fsmpc
