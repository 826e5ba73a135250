#include "fsmpc/monitor.hpp"

#include <algorithm>
#include <cmath>

namespace fsmpc {

StoppingRecord stopping_time(const Trajectory& tr, const HPolytope& E) {
    if (tr.steps.empty()) throw Error("stopping_time: empty trajectory");
    for (const auto& s : tr.steps) {
        if (!contains(E, s.x - s.xhat)) return {s.x, s.xhat, s.a, s.t, true};
    }
    const auto& last = tr.steps.back();
    return {last.x, last.xhat, last.a, last.t, false};
}

CalibrationSet calibration_from_scores(std::vector<double> scores) {
    for (double a : scores)
        if (std::isnan(a)) throw Error("calibration: NaN anomaly score");
    std::sort(scores.begin(), scores.end());
    return {std::move(scores)};
}

CalibrationSet calibrate(const std::vector<Trajectory>& data, const HPolytope& E) {
    std::vector<double> scores;
    for (const auto& tr : data) {
        const auto rec = stopping_time(tr, E);
        if (rec.fault) scores.push_back(rec.a);
    }
    return calibration_from_scores(std::move(scores));
}

bool conformal_alarm(double a_test, const CalibrationSet& A, double delta, double v) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error("conformal_alarm: delta must lie in [0, 1]");
    if (std::isnan(a_test)) throw Error("conformal_alarm: NaN anomaly score");
    const auto& s = A.scores;
    const auto lo = std::lower_bound(s.begin(), s.end(), a_test);
    const auto hi = std::upper_bound(s.begin(), s.end(), a_test);
    const auto greater = static_cast<double>(s.end() - hi);
    const auto ties = static_cast<double>(hi - lo);
    const double U = std::min(ties, std::floor(v * (ties + 1.0)));
    const double q = (greater + U + 1.0) / (static_cast<double>(s.size()) + 1.0);
    return q <= 1.0 - delta;
}

bool conformal_alarm(double a_test, const CalibrationSet& A, double delta, std::mt19937_64& rng) {
    return conformal_alarm(a_test, A, delta, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

bool supervisor_alarm(const Vec& e, const HPolytope& E) { return !contains(E, e); }

double effective_delta(double delta_target, std::size_t n_A) {
    if (!(delta_target > 0.0 && delta_target <= 1.0))
        throw Error("effective_delta: delta must lie in (0, 1]");
    const double n = static_cast<double>(n_A);
    if (1.0 / delta_target - 1.0 > n)
        throw InsufficientFaultData("too few fault trajectories for the requested risk level");
    const double d = delta_target - 1.0 / (n + 1.0);
    if (!(d > 0.0)) throw InsufficientFaultData("adjusted risk level is not positive");
    return d;
}

Monitor make_supervisor_monitor(const HPolytope& E) {
    return [E](double, const Vec& e, std::mt19937_64&) { return supervisor_alarm(e, E); };
}

Monitor make_conformal_monitor(CalibrationSet A, double delta) {
    return [A = std::move(A), delta](double a, const Vec&, std::mt19937_64& rng) {
        return conformal_alarm(a, A, delta, rng);
    };
}

Monitor make_null_monitor() {
    return [](double, const Vec&, std::mt19937_64&) { return false; };
}

void accumulate(MonitorStats& s, const Trajectory& tr, const HPolytope& E) {
    if (tr.aborted && tr.env.fault_enabled) {
        // Stopped by the t = 0 alarm before the fault began; the injected fault would
        // have left E later, and the alarm precedes that stopping time.
        ++s.fault_trajectories;
        for (const auto& st : tr.steps)
            if (contains(E, st.x - st.xhat)) {
                ++s.reliable_steps;
                if (st.alarm) ++s.false_alarms;
            }
        return;
    }
    const auto rec = stopping_time(tr, E);
    if (rec.fault) {
        ++s.fault_trajectories;
        bool caught = false;
        for (const auto& st : tr.steps)
            if (st.t <= rec.t_stop && st.alarm) caught = true;
        if (!caught) ++s.false_negatives;
    }
    for (const auto& st : tr.steps) {
        if (contains(E, st.x - st.xhat)) {
            ++s.reliable_steps;
            if (st.alarm) ++s.false_alarms;
        }
    }
}

double wilson_lower(int k, int n, double z) {
    if (n <= 0) return 0.0;
    const double p = static_cast<double>(k) / n;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::max(0.0, (centre - half) / (1.0 + z2 / n));
}

double wilson_upper(int k, int n, double z) {
    if (n <= 0) return 1.0;
    const double p = static_cast<double>(k) / n;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::min(1.0, (centre + half) / (1.0 + z2 / n));
}

} // namespace fsmpc
