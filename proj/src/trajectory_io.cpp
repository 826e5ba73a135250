#include "fsmpc/trajectory_io.hpp"

#include "fsmpc/json_io.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace fsmpc {

using nlohmann::json;

namespace {

Mode mode_from_string(const std::string& s) {
    if (s == "nominal") return Mode::Nominal;
    if (s == "fallback") return Mode::Fallback;
    if (s == "recovery") return Mode::Recovery;
    throw FormatError("unknown mode: " + s);
}

} // namespace

json episode_header(const Trajectory& tr, const json& extra) {
    json h = {{"type", "episode"},
              {"scenario", tr.scenario},
              {"controller", tr.controller},
              {"seed", tr.seed},
              {"env",
               {{"fault_enabled", tr.env.fault_enabled},
                {"fault_start", tr.env.fault_start},
                {"rng_seed", tr.env.rng_seed}}},
              {"steps", tr.steps.size()},
              {"violated_X", tr.violated_X},
              {"violated_U", tr.violated_U},
              {"unsafe_stop", tr.unsafe_stop},
              {"reached_recovery", tr.reached_recovery},
              {"aborted", tr.aborted},
              {"t_fail", tr.t_fail},
              {"recovery_index", tr.recovery_index},
              {"frozen_at", tr.frozen_at},
              {"infeasible_nominal", tr.infeasible_nominal}};
    if (extra.is_object())
        for (const auto& [k, v] : extra.items()) h[k] = v;
    return h;
}

json step_to_json(const StepRecord& s) {
    return {{"t", s.t},
            {"x", vec_to_json(s.x)},
            {"u", vec_to_json(s.u)},
            {"xhat", vec_to_json(s.xhat)},
            {"y", vec_to_json(s.y)},
            {"a", s.a},
            {"mode", to_string(s.mode)},
            {"feasible", s.feasible},
            {"alarm", s.alarm}};
}

void write_trajectory(std::ostream& os, const Trajectory& tr, const json& extra) {
    os << episode_header(tr, extra).dump() << '\n';
    for (const auto& s : tr.steps) os << step_to_json(s).dump() << '\n';
}

std::vector<Trajectory> read_trajectories(std::istream& is) {
    std::vector<Trajectory> out;
    std::string line;
    std::size_t remaining = 0;
    int lineno = 0;
    try {
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            const json j = json::parse(line);
            if (remaining == 0) {
                if (j.value("type", "") == "run") continue; // provenance line
                if (j.value("type", "") != "episode") throw FormatError("expected an episode header");
                Trajectory tr;
                tr.scenario = j.at("scenario").get<std::string>();
                tr.controller = j.value("controller", "");
                tr.seed = j.at("seed").get<std::uint64_t>();
                const auto& env = j.at("env");
                tr.env.fault_enabled = env.at("fault_enabled").get<bool>();
                tr.env.fault_start = env.at("fault_start").get<int>();
                tr.env.rng_seed = env.at("rng_seed").get<std::uint64_t>();
                tr.violated_X = j.value("violated_X", false);
                tr.violated_U = j.value("violated_U", false);
                tr.unsafe_stop = j.value("unsafe_stop", false);
                tr.reached_recovery = j.value("reached_recovery", false);
                tr.aborted = j.value("aborted", false);
                tr.t_fail = j.value("t_fail", -1);
                tr.recovery_index = j.value("recovery_index", -1);
                tr.frozen_at = j.value("frozen_at", -1);
                tr.infeasible_nominal = j.value("infeasible_nominal", 0);
                remaining = j.at("steps").get<std::size_t>();
                out.push_back(std::move(tr));
                if (remaining == 0) throw FormatError("episode without steps");
                continue;
            }
            StepRecord s;
            s.t = j.at("t").get<int>();
            s.x = vec_from_json(j.at("x"));
            s.u = vec_from_json(j.at("u"));
            s.xhat = vec_from_json(j.at("xhat"));
            s.y = vec_from_json(j.at("y"));
            s.a = j.at("a").get<double>();
            s.mode = mode_from_string(j.at("mode").get<std::string>());
            s.feasible = j.at("feasible").get<bool>();
            s.alarm = j.at("alarm").get<bool>();
            out.back().steps.push_back(std::move(s));
            --remaining;
        }
    } catch (const json::exception& e) {
        throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (remaining != 0) throw FormatError("truncated trajectory file");
    return out;
}

} // namespace fsmpc
