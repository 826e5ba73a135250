#pragma once

#include "fsmpc/linsys.hpp"
#include "fsmpc/polytope.hpp"
#include "fsmpc/qp.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fsmpc {

/// A tightened constraint set came out empty. `stage` is the tube index
/// (0..T for X/U, T+1 for a recovery set).
class EmptyTightening : public Error {
public:
    EmptyTightening(const std::string& what, int stage) : Error(what), stage(stage) {}
    int stage;
};

/// Output feedback used once the fallback horizon is exhausted.
struct RecoveryPolicy {
    enum class Kind { Zero, AffineOutput };
    Kind kind = Kind::Zero;
    Vec eps;  ///< offset added to the linearization input (AffineOutput)
    Mat K;    ///< m x r gain (AffineOutput)

    static RecoveryPolicy zero() { return {}; }
    static RecoveryPolicy affine(Vec eps, Mat K) { return {Kind::AffineOutput, std::move(eps), std::move(K)}; }

    /// Absolute input. Zero gives the zero vector; AffineOutput gives u_ref + eps + K y.
    Vec input(const Vec& y, const Vec& u_ref) const;
};

struct RecoverySet {
    std::string name;
    HPolytope X_R;
    RecoveryPolicy policy;
};

struct MPCConfig {
    LinearSystem sys;
    int T = 10;
    Mat K;            ///< fallback feedback gain (m x r)
    Mat Q, R, Qf;     ///< nominal-trajectory cost
    HPolytope X, U;   ///< U in absolute inputs
    Zonotope W, E;
    std::vector<RecoverySet> recovery;
    Vec goal;
    Vec u_ref;        ///< linearization input; the QP works in deviations from it
    double fallback_reg = 1e-3; ///< small cost on fallback inputs so the QP is strictly convex
    /// Baseline mode: the nominal and fallback trajectories share all inputs.
    bool single_trajectory = false;

    void validate() const;
    Mat closed_loop() const { return sys.closed_loop(K); }
};

struct TubeSets {
    std::vector<Zonotope> F;         ///< F_0..F_{T+1}
    std::vector<HPolytope> X_tight;  ///< X minus (F_k + E), k = 0..T
    std::vector<HPolytope> U_tight;  ///< U minus KC(F_k + E), k = 0..T
    std::vector<HPolytope> XR_tight; ///< one per recovery set
};

/// Throws EmptyTightening on the first empty tightened set.
TubeSets build_tubes(const MPCConfig& cfg);

struct MPCSolution {
    std::vector<Vec> u_nom; ///< T+1 absolute inputs
    std::vector<Vec> u_fb;  ///< T+1 absolute fallback inputs
    std::vector<Vec> x_fb;  ///< T+2 nominal fallback states
    std::vector<Vec> y_fb;  ///< T+1 outputs C x_fb
    std::vector<Vec> x_nom; ///< T+2 nominal states
    double cost = 0.0;
    int recovery_index = -1;
    int qp_iterations = 0;
};

/// Checks that the policy keeps inputs in U for every y in C(X_R + E).
/// Returns false if U can be violated or the bound is unbounded.
bool recovery_input_admissible(const RecoverySet& rs, const MPCConfig& cfg);

/// The fallback-safe tube MPC: one cached QP per recovery set.
class TubeMPC {
public:
    explicit TubeMPC(MPCConfig cfg);
    TubeMPC(MPCConfig cfg, TubeSets tubes);
    ~TubeMPC();
    TubeMPC(TubeMPC&&) noexcept;
    TubeMPC& operator=(TubeMPC&&) noexcept;

    const MPCConfig& config() const { return cfg_; }
    const TubeSets& tubes() const { return tubes_; }

    /// Minimum-cost feasible plan over all recovery sets; nullopt if none is feasible.
    std::optional<MPCSolution> solve(const Vec& xhat);
    /// Same, restricted to recovery sets whose index has `mask[i]` true; an empty mask means all.
    std::optional<MPCSolution> solve(const Vec& xhat, const std::vector<bool>& mask);

private:
    struct Impl;
    MPCConfig cfg_;
    TubeSets tubes_;
    std::unique_ptr<Impl> impl_;
};

} // namespace fsmpc
