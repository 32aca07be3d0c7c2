// lqgfg run <limit-solve|check|simulate|nash-gap|sweep> [--config PATH] [--out DIR]
//           [--seed INT] [--dt FLOAT] [--jobs INT]
//
// Settings are layered: defaults, then the config file, then LQGFG_*
// environment variables, then flags. Exit codes: 0 success, 1 configuration
// or input error, 2 finite escape of a Riccati equation, 3 numerical blow-up.

#include "lqgfg/errors.hpp"
#include "lqgfg/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

std::optional<std::string> env(const char* name) {
    if (const char* v = std::getenv(name)) {
        return std::string(v);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear quadratic graphon field games: limit solve, simulation and Nash gaps"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run one pipeline command");

    std::string command;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<int> jobs;
    run->add_option("command", command, "limit-solve, check, simulate, nash-gap or sweep")->required();
    run->add_option("--config", config_path, "key = value run configuration");
    run->add_option("--out", out, "output directory");
    run->add_option("--seed", seed, "seed for Gaussian initial states");
    run->add_option("--dt", dt, "integration step");
    run->add_option("--jobs", jobs, "OpenMP worker count");

    CLI11_PARSE(app, argc, argv);

    try {
        const lqgfg::Command cmd = lqgfg::parse_command(command);
        if (config_path.empty()) {
            config_path = env("LQGFG_CONFIG").value_or("");
        }
        lqgfg::RunConfig config;
        if (!config_path.empty()) {
            config = lqgfg::load_config(config_path);
        }
        for (const auto& [var, key] : {std::pair{"LQGFG_OUT", "out"}, std::pair{"LQGFG_SEED", "seed"},
                                       std::pair{"LQGFG_DT", "dt"}, std::pair{"LQGFG_JOBS", "jobs"}}) {
            if (const auto value = env(var)) {
                lqgfg::apply_setting(config, key, *value);
            }
        }
        if (out) {
            config.out = *out;
        }
        if (seed) {
            config.seed = *seed;
        }
        if (dt) {
            config.params.dt = *dt;
        }
        if (jobs) {
            config.jobs = *jobs;
        }
        lqgfg::run(config, cmd, std::cout);
    } catch (const lqgfg::FiniteEscape& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lqgfg::BlowUp& e) {
        std::cerr << "error: numerical blow-up: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
