#include "fsmpc/experiments.hpp"

#include <atomic>
#include <thread>

namespace fsmpc {

std::uint64_t episode_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t z = master ^ (stream * 0xd1b54a32d192ed03ULL) ^ (index * 0x9e3779b97f4a7c15ULL);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<EpisodeOutcome> run_batch(const Scenario& scn, const EnvDistribution& envd,
                                      const Monitor& monitor, ControllerKind kind, int episodes,
                                      std::uint64_t master_seed, std::uint64_t stream, int workers) {
    std::vector<EpisodeOutcome> out(static_cast<std::size_t>(std::max(episodes, 0)));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < episodes; i = next++) {
            std::mt19937_64 rng(episode_seed(master_seed, stream, static_cast<std::uint64_t>(i)));
            const auto env = sample_environment(envd, rng);
            auto& o = out[static_cast<std::size_t>(i)];
            try {
                o.tr = run_episode(scn, env, monitor, kind);
            } catch (const PreconditionViolation& e) {
                o.tr = e.partial;
                o.precondition_failed = true;
                o.error = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min(workers, episodes));
    if (nthreads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

BatchSummary summarize(const std::vector<EpisodeOutcome>& runs, const Scenario& scn) {
    BatchSummary s;
    for (const auto& r : runs) {
        const auto& tr = r.tr;
        ++s.episodes;
        if (r.precondition_failed) ++s.aborted;
        const bool bad = tr.violated_X || tr.violated_U || tr.unsafe_stop;
        if (!bad) ++s.safe;
        s.violated_X += tr.violated_X;
        s.violated_U += tr.violated_U;
        s.unsafe_stop += tr.unsafe_stop;
        s.faults += tr.env.fault_enabled;
        if (tr.t_fail >= 0) {
            ++s.fallback_triggers;
            if (tr.t_fail + scn.cfg.T <= scn.t_lim) {
                ++s.recovery_due;
                s.reached_recovery += tr.reached_recovery;
            }
        }
        s.infeasible_episodes += tr.infeasible_nominal > 0;
        for (const auto& st : tr.steps) {
            ++s.steps;
            s.alarms += st.alarm;
        }
    }
    return s;
}

SweepRow evaluate_delta(const Scenario& scn, const EnvDistribution& envd, const CalibrationSet& A,
                        double delta, int episodes, std::uint64_t seed, int workers) {
    const auto runs = run_batch(scn, envd, make_conformal_monitor(A, delta), ControllerKind::FallbackSafe,
                                episodes, seed, 2, workers);
    MonitorStats ms;
    for (const auto& r : runs) accumulate(ms, r.tr, scn.E_hpoly);
    const auto sum = summarize(runs, scn);
    SweepRow row;
    row.delta = delta;
    row.fnr = ms.fnr();
    row.fpr = ms.fpr();
    row.bound = delta + 1.0 / (static_cast<double>(A.size()) + 1.0);
    row.fnr_upper = wilson_upper(ms.false_negatives, ms.fault_trajectories);
    row.safety_rate = sum.safety_rate();
    row.safety_lower = 1.0 - wilson_upper(sum.episodes - sum.safe, sum.episodes);
    row.fault_trajectories = ms.fault_trajectories;
    row.false_negatives = ms.false_negatives;
    row.episodes = sum.episodes;
    row.unsafe = sum.episodes - sum.safe;
    return row;
}

} // namespace fsmpc
