#include "commands.hpp"
#include "fsmpc/monitor.hpp"

#include <CLI11.hpp>
#include <iostream>

using namespace fsmpc;

int main(int argc, char** argv) {
    CLI::App app{"fallback-safe tube MPC simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
    app.add_option("--config", config_path, "TOML or JSON run configuration")->required();
    app.add_option("--seed", seed, "master seed (overrides io.seed)");
    app.add_option("--out", out, "output directory (overrides io.out)");
    app.add_option("--workers", workers, "worker threads (overrides io.workers)")->check(CLI::Range(1, 1024));
    app.fallthrough();

    using Cmd = int (*)(const RunConfig&, const cli::Flags&);
    const std::pair<const char*, Cmd> cmds[] = {
        {"simulate", cli::cmd_simulate},   {"collect", cli::cmd_collect},
        {"calibrate", cli::cmd_calibrate}, {"evaluate", cli::cmd_evaluate},
        {"rpi", cli::cmd_rpi},
    };
    const char* help[] = {"run episodes and write trajectories.jsonl + summary.csv",
                          "collect supervisor-monitored calibration trajectories",
                          "compute the calibration set and the minimum certifiable delta",
                          "sweep the delta grid with the conformal monitor",
                          "compute and verify a robust positive invariant set"};
    for (std::size_t i = 0; i < std::size(cmds); ++i) app.add_subcommand(cmds[i].first, help[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfig;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return cli::kConfig;
    }
    cli::Flags f;
    f.out = out.value_or(cfg.io.out);
    f.seed = seed.value_or(cfg.io.seed);
    f.workers = workers.value_or(cfg.io.workers);

    for (const auto& [name, fn] : cmds) {
        if (!app.got_subcommand(name)) continue;
        try {
            return fn(cfg, f);
        } catch (const ConfigError& e) {
            std::cerr << "error[config]: " << e.what() << "\n";
            return cli::kConfig;
        } catch (const InsufficientFaultData& e) {
            std::cerr << "error[insufficient_fault_data]: " << e.what() << "\n";
            return cli::kPrecondition;
        } catch (const PreconditionViolation& e) {
            std::cerr << "error[precondition]: " << e.what() << "\n";
            return cli::kPrecondition;
        } catch (const std::exception& e) {
            std::cerr << "error[runtime]: " << e.what() << "\n";
            return 1;
        }
    }
    return cli::kConfig;
}
