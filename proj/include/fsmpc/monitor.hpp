#pragma once

#include "fsmpc/polytope.hpp"
#include "fsmpc/sim.hpp"

#include <random>
#include <string>
#include <vector>

namespace fsmpc {

class InsufficientFaultData : public Error {
public:
    using Error::Error;
};

struct StoppingRecord {
    Vec x, xhat;
    double a = 0.0;
    int t_stop = 0;
    bool fault = false;
};

/// First step whose error x - xhat leaves E, else the last step (time limit).
StoppingRecord stopping_time(const Trajectory& tr, const HPolytope& E);

struct CalibrationSet {
    std::vector<double> scores; ///< sorted ascending
    std::size_t size() const { return scores.size(); }
};

/// Scores at the stopping time of every faulty trajectory. NaN scores throw.
CalibrationSet calibrate(const std::vector<Trajectory>& data, const HPolytope& E);
CalibrationSet calibration_from_scores(std::vector<double> scores);

/// Randomized rank test. `v` in [0, 1) selects the tie offset U = floor(v (#ties + 1)).
bool conformal_alarm(double a_test, const CalibrationSet& A, double delta, double v);
/// Same, drawing v from rng.
bool conformal_alarm(double a_test, const CalibrationSet& A, double delta, std::mt19937_64& rng);

/// 1 iff e is outside E.
bool supervisor_alarm(const Vec& e, const HPolytope& E);

/// delta - 1/(n_A + 1); throws InsufficientFaultData when 1/delta - 1 > n_A or the result is not positive.
double effective_delta(double delta_target, std::size_t n_A);

Monitor make_supervisor_monitor(const HPolytope& E);
Monitor make_conformal_monitor(CalibrationSet A, double delta);
Monitor make_null_monitor();

/// False negative: a fault trajectory with no alarm at or before its stopping time.
struct MonitorStats {
    int fault_trajectories = 0;
    int false_negatives = 0;
    long reliable_steps = 0;
    long false_alarms = 0; ///< alarms on steps with e in E
    double fnr() const { return fault_trajectories ? double(false_negatives) / fault_trajectories : 0.0; }
    double fpr() const { return reliable_steps ? double(false_alarms) / reliable_steps : 0.0; }
};

/// Accumulates FNR/FPR counts. Alarms are read from each step's raw monitor output.
/// An aborted run with a scheduled fault counts as a detected fault trajectory.
void accumulate(MonitorStats& s, const Trajectory& tr, const HPolytope& E);

/// Wilson score upper bound for a binomial proportion (z = 1.96 by default).
double wilson_upper(int successes, int n, double z = 1.96);
double wilson_lower(int successes, int n, double z = 1.96);

} // namespace fsmpc
