#include "fsmpc/config.hpp"

#include "fsmpc/json_io.hpp"

#include <toml.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fsmpc {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

json toml_to_json(const toml::node& n) {
    if (auto t = n.as_table()) {
        json o = json::object();
        for (const auto& [k, v] : *t) o[std::string(k.str())] = toml_to_json(v);
        return o;
    }
    if (auto a = n.as_array()) {
        json arr = json::array();
        for (const auto& v : *a) arr.push_back(toml_to_json(v));
        return arr;
    }
    if (auto v = n.as_integer()) return v->get();
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_boolean()) return v->get();
    if (auto v = n.as_string()) return v->get();
    throw ConfigError("unsupported TOML value type (dates are not allowed)");
}

/// Reads keys from one table and rejects the ones nobody asked for.
class Block {
public:
    Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("[" + name_ + "] must be a table");
    }
    ~Block() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
    }
    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }
    template <class T>
    void get(const std::string& k, T& out) {
        if (!has(k)) return;
        try {
            out = j_.at(k).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad value for '" + k + "' in [" + name_ + "]");
        }
    }
    const json& at(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

Vec read_vec(const json& j, const char* what) {
    try {
        return vec_from_json(j);
    } catch (const Error&) {
        throw ConfigError(std::string("bad vector for ") + what);
    }
}

} // namespace

RunConfig parse_config_json(const json& doc) {
    RunConfig c;
    c.source = doc;
    c.hash = fnv1a64(doc.dump());
    Block top(doc, "root");
    if (top.has("scenario")) {
        Block b(top.at("scenario"), "scenario");
        auto& s = c.scenario;
        auto& o = s.options;
        b.get("name", s.name);
        b.get("controller", s.controller);
        b.get("episodes", s.episodes);
        b.get("nonlinear", s.nonlinear);
        b.get("T", o.T);
        b.get("t_lim", o.t_lim);
        b.get("y_land", o.y_land);
        b.get("eps", o.eps);
        b.get("fallback_reg", o.fallback_reg);
        b.get("attitude_gain_r", o.attitude_gain_r);
        b.get("use_attitude_gain", o.use_attitude_gain);
        b.get("u_lo", o.u_lo);
        b.get("u_hi", o.u_hi);
        b.get("mass", o.quad.m);
        b.get("gravity", o.quad.g);
        b.get("arm_length", o.quad.l);
        b.get("inertia", o.quad.I);
        b.get("dt", o.quad.dt);
        if (b.has("x0")) o.x0 = read_vec(b.at("x0"), "x0");
        if (b.has("goal")) o.goal = read_vec(b.at("goal"), "goal");
    }
    if (top.has("environment")) {
        Block b(top.at("environment"), "environment");
        b.get("p_fault", c.environment.p_fault);
        b.get("start_lo", c.environment.start_lo);
        b.get("start_hi", c.environment.start_hi);
    }
    if (top.has("monitor")) {
        Block b(top.at("monitor"), "monitor");
        b.get("type", c.monitor.type);
        b.get("delta", c.monitor.delta);
        std::string score = to_string(c.monitor.score);
        b.get("score", score);
        try {
            c.monitor.score = score_model_from_string(score);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        b.get("sigma", c.monitor.sigma);
    }
    if (top.has("sweep")) {
        Block b(top.at("sweep"), "sweep");
        b.get("deltas", c.sweep.deltas);
        b.get("calibration_episodes", c.sweep.calibration_episodes);
        b.get("test_episodes", c.sweep.test_episodes);
        if (b.has("target_delta")) {
            double d = 0;
            b.get("target_delta", d);
            c.sweep.target_delta = d;
        }
    }
    if (top.has("io")) {
        Block b(top.at("io"), "io");
        b.get("out", c.io.out);
        b.get("seed", c.io.seed);
        b.get("workers", c.io.workers);
        b.get("calibration", c.io.calibration);
    }
    if (top.has("rpi")) {
        Block b(top.at("rpi"), "rpi");
        auto& r = c.rpi;
        r.present = true;
        b.get("use_landing", r.use_landing);
        b.get("max_iter", r.max_iter);
        b.get("tol", r.tol);
        try {
            if (b.has("A_cl")) r.A_cl = mat_from_json(b.at("A_cl"));
            if (b.has("D")) r.D = zonotope_from_json(b.at("D"));
            if (b.has("X")) r.X = hpoly_from_json(b.at("X"));
        } catch (const Error& e) {
            throw ConfigError(std::string("[rpi]: ") + e.what());
        }
        if (!r.use_landing && (r.A_cl.size() == 0 || r.X.dim() == 0))
            throw ConfigError("[rpi] needs A_cl, D and X (or use_landing = true)");
    }

    // Validation.
    const auto& s = c.scenario;
    if (s.name != "landing" && s.name != "goal_nav") throw ConfigError("scenario.name must be landing or goal_nav");
    try {
        controller_kind_from_string(s.controller);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if ((s.options.x0.size() && s.options.x0.size() != 6) || (s.options.goal.size() && s.options.goal.size() != 6))
        throw ConfigError("scenario.x0 and scenario.goal must have 6 entries");
    if (s.episodes < 0) throw ConfigError("scenario.episodes must be nonnegative");
    if (s.options.T < 1) throw ConfigError("scenario.T must be at least 1");
    if (s.options.t_lim < s.options.T + 2) throw ConfigError("scenario.t_lim must be at least T + 2");
    const auto& m = c.monitor;
    if (m.type != "supervisor" && m.type != "conformal" && m.type != "none")
        throw ConfigError("monitor.type must be supervisor, conformal or none");
    if (!(m.delta > 0.0 && m.delta <= 1.0)) throw ConfigError("monitor.delta must lie in (0, 1]");
    if (!(m.sigma >= 0.0)) throw ConfigError("monitor.sigma must be nonnegative");
    for (double d : c.sweep.deltas)
        if (!(d > 0.0 && d <= 1.0)) throw ConfigError("sweep.deltas must lie in (0, 1]");
    if (c.sweep.target_delta && !(*c.sweep.target_delta > 0.0 && *c.sweep.target_delta <= 1.0))
        throw ConfigError("sweep.target_delta must lie in (0, 1]");
    const auto& e = c.environment;
    if (!(e.p_fault >= 0.0 && e.p_fault <= 1.0)) throw ConfigError("environment.p_fault must lie in [0, 1]");
    if (e.start_lo < 0 || e.start_hi < e.start_lo || e.start_hi > s.options.t_lim)
        throw ConfigError("environment start window must satisfy 0 <= start_lo <= start_hi <= t_lim");
    if (c.io.workers < 1) throw ConfigError("io.workers must be at least 1");
    return c;
}

RunConfig parse_config_toml(const std::string& text) {
    try {
        const auto tbl = toml::parse(text);
        return parse_config_json(toml_to_json(tbl));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML parse error: " << e.description() << " at " << e.source().begin;
        throw ConfigError(os.str());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    if (is_json) {
        try {
            return parse_config_json(json::parse(text));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
    }
    return parse_config_toml(text);
}

Scenario build_scenario(const RunConfig& cfg) {
    const auto& s = cfg.scenario;
    Scenario scn;
    try {
        scn = s.name == "landing" ? make_landing(s.options) : make_goal_nav(s.options);
    } catch (const DimensionMismatch& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    scn.nonlinear = s.nonlinear;
    scn.perception.score = cfg.monitor.score;
    scn.perception.sigma = cfg.monitor.sigma;
    return scn;
}

} // namespace fsmpc
