#pragma once

#include "fsmpc/controller.hpp"
#include "fsmpc/linsys.hpp"
#include "fsmpc/mpc.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fsmpc {

struct Environment {
    bool fault_enabled = false;
    int fault_start = 0;
    std::uint64_t rng_seed = 0;
};

struct EnvDistribution {
    double p_fault = 1.0 / 3.0;
    int start_lo = 5;  ///< inclusive
    int start_hi = 20; ///< inclusive
};

Environment sample_environment(const EnvDistribution& d, std::mt19937_64& rng);

enum class ScoreModel { Perfect, NoisyNorm, PureNoise };
const char* to_string(ScoreModel s);
ScoreModel score_model_from_string(const std::string& s);

struct PerceptionSpec {
    Zonotope nominal;              ///< sampling region for in-set errors (inside E)
    std::vector<int> fault_coords; ///< coordinates replaced by uniform draws during a fault
    double fault_lo = -10.0;
    double fault_hi = 10.0;
    ScoreModel score = ScoreModel::NoisyNorm;
    double sigma = 0.2;
};

/// Plant freezes (state held, inputs ignored) once it enters this region.
struct FreezeRule {
    double y_land = 0.0;
    double theta_max = 3.14159265358979323846 / 12.0;
    double v_max = 0.1;
    bool applies(const Vec& x) const;
};

struct Scenario {
    std::string name;
    MPCConfig cfg;
    int t_lim = 53;
    Vec x0;
    std::optional<FreezeRule> freeze;
    /// Frozen with |x| < unsafe_halfwidth counts as unsafe (0 disables).
    double unsafe_halfwidth = 0.0;
    PerceptionSpec perception;
    HPolytope E_hpoly;             ///< membership form of cfg.E
    bool nonlinear = false;
    QuadrotorParams quad;          ///< used by the nonlinear plant
};

struct StepRecord {
    int t = 0;
    Vec x, u, xhat, y;
    double a = 0.0;
    Mode mode = Mode::Nominal;
    bool feasible = true;
    bool alarm = false;
};

struct Trajectory {
    std::string scenario;
    std::string controller;
    std::uint64_t seed = 0;
    Environment env;
    std::vector<StepRecord> steps;
    bool violated_X = false;
    bool violated_U = false;
    bool unsafe_stop = false;
    bool reached_recovery = false;
    bool aborted = false;    ///< precondition failed at t = 0
    int t_fail = -1;
    int infeasible_nominal = 0; ///< nominal-mode solves that failed
    int frozen_at = -1;
    int recovery_index = -1;    ///< recovery set targeted by the fallback plan
};

/// Run aborted because the controller's preconditions failed at t = 0
/// (alarm or infeasible first solve). Carries the partial trajectory.
class PreconditionViolation : public Error {
public:
    PreconditionViolation(const std::string& what, Trajectory partial)
        : Error(what), partial(std::move(partial)) {}
    Trajectory partial;
};

/// Per-step monitor: (score, true error, rng) -> alarm.
using Monitor = std::function<bool(double a, const Vec& e, std::mt19937_64& rng)>;

/// Controller kinds sharing the episode loop.
enum class ControllerKind { FallbackSafe, NaiveTube, UnsafeFallback };
const char* to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& s);

/// Runs one closed-loop episode of t_lim + 1 steps.
/// Throws PreconditionViolation if the first solve is infeasible or the monitor alarms at t = 0.
Trajectory run_episode(const Scenario& scn, const Environment& env, const Monitor& monitor,
                       ControllerKind kind = ControllerKind::FallbackSafe);

struct SafetyReport {
    bool safe = true;
    int first_x_violation = -1;
    int first_u_violation = -1;
    bool unsafe_stop = false;
};

SafetyReport check_safety(const Trajectory& tr, const HPolytope& X, const HPolytope& U,
                          double tol = 1e-7);

} // namespace fsmpc
