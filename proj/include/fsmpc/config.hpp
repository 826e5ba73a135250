#pragma once

#include "fsmpc/polytope.hpp"
#include "fsmpc/scenarios.hpp"
#include "fsmpc/sim.hpp"

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace fsmpc {

/// Invalid or unreadable configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ScenarioBlock {
    std::string name = "landing"; ///< landing | goal_nav
    std::string controller = "fallback_safe";
    int episodes = 20;
    bool nonlinear = false;
    QuadScenarioOptions options;
};

struct MonitorBlock {
    std::string type = "supervisor"; ///< supervisor | conformal | none
    double delta = 0.1;
    ScoreModel score = ScoreModel::NoisyNorm;
    double sigma = 0.2;
};

struct SweepBlock {
    std::vector<double> deltas = {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5};
    int calibration_episodes = 100;
    int test_episodes = 900;
    /// Target end-to-end risk; evaluate also reports the row at its adjusted level.
    std::optional<double> target_delta;
};

struct IoBlock {
    std::string out = "out";
    std::uint64_t seed = 0;
    int workers = 1;
    std::string calibration = ""; ///< trajectory JSONL read by calibrate/evaluate
};

/// Standalone RPI problem for the rpi subcommand. Empty unless configured;
/// `use_landing` verifies the landing recovery set instead.
struct RpiBlock {
    bool present = false;
    bool use_landing = false;
    Mat A_cl;
    Zonotope D;
    HPolytope X;
    int max_iter = 200;
    double tol = 1e-8;
};

struct RunConfig {
    ScenarioBlock scenario;
    EnvDistribution environment;
    MonitorBlock monitor;
    SweepBlock sweep;
    IoBlock io;
    RpiBlock rpi;
    nlohmann::json source; ///< normalized document the config was parsed from
    std::uint64_t hash = 0;
};

/// Parses a TOML (.toml) or JSON document. Unknown keys throw ConfigError.
RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& doc);
RunConfig parse_config_toml(const std::string& text);

/// Scenario built from the scenario, environment and monitor blocks.
Scenario build_scenario(const RunConfig& cfg);

/// FNV-1a 64-bit hash of a string.
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

} // namespace fsmpc
