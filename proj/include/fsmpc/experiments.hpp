#pragma once

#include "fsmpc/monitor.hpp"
#include "fsmpc/sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fsmpc {

/// Seed of episode `index` in stream `stream` (independent of worker count).
std::uint64_t episode_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct EpisodeOutcome {
    Trajectory tr;
    bool precondition_failed = false;
    std::string error;
};

/// Runs `episodes` episodes on `workers` threads; results are in episode order.
std::vector<EpisodeOutcome> run_batch(const Scenario& scn, const EnvDistribution& envd,
                                      const Monitor& monitor, ControllerKind kind, int episodes,
                                      std::uint64_t master_seed, std::uint64_t stream, int workers);

struct BatchSummary {
    int episodes = 0;
    int safe = 0;
    int violated_X = 0;
    int violated_U = 0;
    int unsafe_stop = 0;
    int aborted = 0;
    int faults = 0;
    int fallback_triggers = 0;
    int reached_recovery = 0;
    int recovery_due = 0;          ///< triggers with t_fail + T inside the episode
    int infeasible_episodes = 0;   ///< nominal-mode infeasible solves occurred
    long steps = 0;
    long alarms = 0;
    double safety_rate() const { return episodes ? double(safe) / episodes : 1.0; }
    double alarm_rate() const { return steps ? double(alarms) / steps : 0.0; }
};

/// Aborted runs (precondition at t = 0) are counted as safe: the controller never starts.
BatchSummary summarize(const std::vector<EpisodeOutcome>& runs, const Scenario& scn);

struct SweepRow {
    double delta = 0.0;        ///< risk level given to the conformal test
    double fnr = 0.0;
    double fpr = 0.0;
    double bound = 0.0;        ///< delta + 1/(|A| + 1)
    double fnr_upper = 0.0;    ///< Wilson 95% upper bound of fnr
    double safety_rate = 0.0;
    double safety_lower = 0.0; ///< Wilson 95% lower bound of safety_rate
    int fault_trajectories = 0;
    int false_negatives = 0;
    int episodes = 0;
    int unsafe = 0;
};

/// Test episodes with the conformal monitor at risk level `delta`.
SweepRow evaluate_delta(const Scenario& scn, const EnvDistribution& envd, const CalibrationSet& A,
                        double delta, int episodes, std::uint64_t seed, int workers);

} // namespace fsmpc
