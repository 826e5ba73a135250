#include "commands.hpp"

#include "fsmpc/experiments.hpp"
#include "fsmpc/json_io.hpp"
#include "fsmpc/monitor.hpp"
#include "fsmpc/trajectory_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace fsmpc::cli {
namespace {

std::ofstream open_out(const Flags& f, const std::string& name) {
    fs::create_directories(f.out);
    std::ofstream os(fs::path(f.out) / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (fs::path(f.out) / name).string());
    os << std::setprecision(10);
    return os;
}

nlohmann::json provenance(const RunConfig& cfg, const Flags& f, const char* command) {
    return {{"type", "run"}, {"command", command}, {"config_hash", hex64(cfg.hash)}, {"seed", f.seed}};
}

void csv_header(std::ostream& os, const RunConfig& cfg, const Flags& f, const char* command) {
    os << "# command=" << command << " config_hash=" << hex64(cfg.hash) << " seed=" << f.seed << "\n";
}

std::string calibration_path(const RunConfig& cfg, const Flags& f) {
    return cfg.io.calibration.empty() ? (fs::path(f.out) / "calibration.jsonl").string() : cfg.io.calibration;
}

CalibrationSet load_calibration(const RunConfig& cfg, const Flags& f, const Scenario& scn) {
    const auto path = calibration_path(cfg, f);
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read calibration data " + path);
    return calibrate(read_trajectories(is), scn.E_hpoly);
}

void write_runs(std::ostream& os, const RunConfig& cfg, const Flags& f, const char* command,
                const std::vector<EpisodeOutcome>& runs) {
    os << provenance(cfg, f, command).dump() << "\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
        write_trajectory(os, runs[i].tr, {{"episode", i}});
}

int count_failed(const std::vector<EpisodeOutcome>& runs) {
    int n = 0;
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].precondition_failed) {
            std::cerr << "error[precondition]: episode " << i << ": " << runs[i].error << "\n";
            ++n;
        }
    return n;
}

} // namespace

int cmd_simulate(const RunConfig& cfg, const Flags& f) {
    const Scenario scn = build_scenario(cfg);
    const auto kind = controller_kind_from_string(cfg.scenario.controller);
    Monitor mon;
    if (cfg.monitor.type == "supervisor") mon = make_supervisor_monitor(scn.E_hpoly);
    else if (cfg.monitor.type == "conformal")
        mon = make_conformal_monitor(load_calibration(cfg, f, scn), cfg.monitor.delta);
    else mon = make_null_monitor();

    const auto runs = run_batch(scn, cfg.environment, mon, kind, cfg.scenario.episodes, f.seed, 0, f.workers);
    {
        auto os = open_out(f, "trajectories.jsonl");
        write_runs(os, cfg, f, "simulate", runs);
    }
    const auto s = summarize(runs, scn);
    {
        auto os = open_out(f, "summary.csv");
        csv_header(os, cfg, f, "simulate");
        os << "episode,seed,fault,fault_start,safe,violated_X,violated_U,unsafe_stop,aborted,"
              "alarm_rate,t_fail,recovery_index,reached_recovery,infeasible_nominal\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& tr = runs[i].tr;
            int alarms = 0;
            for (const auto& st : tr.steps) alarms += st.alarm;
            const bool safe = !(tr.violated_X || tr.violated_U || tr.unsafe_stop);
            os << i << ',' << tr.seed << ',' << tr.env.fault_enabled << ',' << tr.env.fault_start << ','
               << safe << ',' << tr.violated_X << ',' << tr.violated_U << ',' << tr.unsafe_stop << ','
               << runs[i].precondition_failed << ','
               << (tr.steps.empty() ? 0.0 : double(alarms) / double(tr.steps.size())) << ',' << tr.t_fail
               << ',' << tr.recovery_index << ',' << tr.reached_recovery << ',' << tr.infeasible_nominal
               << "\n";
        }
        os << "all,," << s.faults << ",," << s.safety_rate() << ',' << s.violated_X << ',' << s.violated_U
           << ',' << s.unsafe_stop << ',' << s.aborted << ',' << s.alarm_rate() << ',' << s.fallback_triggers
           << ",," << s.reached_recovery << ',' << s.infeasible_episodes << "\n";
    }
    std::cout << "episodes=" << s.episodes << " safety_rate=" << s.safety_rate()
              << " violations=" << (s.episodes - s.safe) << " alarm_rate=" << s.alarm_rate()
              << " fallback_triggers=" << s.fallback_triggers << " out=" << f.out << "\n";
    return count_failed(runs) ? kPrecondition : kOk;
}

int cmd_collect(const RunConfig& cfg, const Flags& f) {
    const Scenario scn = build_scenario(cfg);
    const auto runs = run_batch(scn, cfg.environment, make_supervisor_monitor(scn.E_hpoly),
                                ControllerKind::FallbackSafe, cfg.sweep.calibration_episodes, f.seed, 1,
                                f.workers);
    const auto path = fs::path(f.out) / "calibration.jsonl";
    {
        auto os = open_out(f, "calibration.jsonl");
        write_runs(os, cfg, f, "collect", runs);
    }
    int faults = 0;
    for (const auto& r : runs) faults += r.tr.env.fault_enabled;
    std::cout << "collected=" << runs.size() << " fault_episodes=" << faults << " out=" << path.string() << "\n";
    return count_failed(runs) ? kPrecondition : kOk;
}

int cmd_calibrate(const RunConfig& cfg, const Flags& f) {
    const Scenario scn = build_scenario(cfg);
    const auto A = load_calibration(cfg, f, scn);
    const double min_delta = 1.0 / (static_cast<double>(A.size()) + 1.0);
    {
        auto os = open_out(f, "calibration_scores.csv");
        csv_header(os, cfg, f, "calibrate");
        os << "index,score\n";
        for (std::size_t i = 0; i < A.size(); ++i) os << i << ',' << A.scores[i] << "\n";
    }
    std::cout << "calibration_size=" << A.size() << " min_certifiable_delta=" << min_delta;
    if (cfg.sweep.target_delta) {
        std::cout << " target_delta=" << *cfg.sweep.target_delta;
        try {
            std::cout << " effective_delta=" << effective_delta(*cfg.sweep.target_delta, A.size()) << "\n";
        } catch (const InsufficientFaultData&) {
            std::cout << "\n";
            throw InsufficientFaultData("need (1/delta) - 1 <= |A| = " + std::to_string(A.size()) +
                                        " and a positive adjusted level");
        }
    } else {
        std::cout << "\n";
    }
    return kOk;
}

int cmd_evaluate(const RunConfig& cfg, const Flags& f) {
    const Scenario scn = build_scenario(cfg);
    const auto A = load_calibration(cfg, f, scn);
    auto os = open_out(f, "evaluate.csv");
    csv_header(os, cfg, f, "evaluate");
    os << "delta,fnr,fpr,bound,safety_rate,fnr_upper,safety_lower,calibration_size,"
          "fault_trajectories,false_negatives,episodes,unsafe\n";
    int rows = 0;
    for (const double d : cfg.sweep.deltas) {
        if (1.0 / d - 1.0 > static_cast<double>(A.size())) {
            std::cerr << "error[insufficient_fault_data]: delta=" << d << " refused: (1/delta) - 1 > |A| = "
                      << A.size() << "\n";
            continue;
        }
        const auto r = evaluate_delta(scn, cfg.environment, A, d, cfg.sweep.test_episodes, f.seed, f.workers);
        os << d << ',' << r.fnr << ',' << r.fpr << ',' << r.bound << ',' << r.safety_rate << ','
           << r.fnr_upper << ',' << r.safety_lower << ',' << A.size() << ',' << r.fault_trajectories << ','
           << r.false_negatives << ',' << r.episodes << ',' << r.unsafe << "\n";
        std::cout << "delta=" << d << " fnr=" << r.fnr << " bound=" << r.bound << " fpr=" << r.fpr
                  << " safety_rate=" << r.safety_rate << "\n";
        ++rows;
    }
    if (rows == 0) throw InsufficientFaultData("every delta in the grid was refused");
    return kOk;
}

int cmd_rpi(const RunConfig& cfg, const Flags& f) {
    const auto& r = cfg.rpi;
    nlohmann::json doc = provenance(cfg, f, "rpi");
    bool ok;
    if (!r.present || r.use_landing) {
        const Scenario scn = make_landing(cfg.scenario.options);
        const auto& rec = scn.cfg.recovery.at(0);
        const Mat Acl = scn.cfg.sys.closed_loop(rec.policy.K);
        const Zonotope D = translate(scn.cfg.W, scn.cfg.sys.B * rec.policy.eps);
        ok = verify_rpi(rec.X_R, Acl, D);
        doc["source"] = "landing_recovery_set";
        doc["set"] = to_json(rec.X_R);
    } else {
        const auto res = max_rpi(r.X, r.A_cl, r.D, r.max_iter, r.tol);
        ok = res.certified;
        const char* st = res.status == RpiStatus::Converged ? "converged"
                         : res.status == RpiStatus::Empty   ? "empty"
                                                            : "max_iter_exceeded";
        doc["source"] = "max_rpi";
        doc["status"] = st;
        doc["iterations"] = res.iterations;
        doc["set"] = to_json(res.set);
    }
    doc["certified"] = ok;
    {
        auto os = open_out(f, "rpi.json");
        os << doc.dump(2) << "\n";
    }
    std::cout << "verify_rpi=" << (ok ? "true" : "false") << " out=" << (fs::path(f.out) / "rpi.json").string()
              << "\n";
    if (!ok) {
        std::cerr << "error[not_certified]: RPI fixpoint not certified; last iterate exported\n";
        return kNotCertified;
    }
    return kOk;
}

} // namespace fsmpc::cli
