#pragma once

// Run configuration and the batch commands behind the command-line tool.
//
// Config files are flat "key = value" text with '#' comments. Every key has
// a default, so an empty file reproduces the multipartite experiment with
// alpha = -0.5, beta = 1, eta = 0.1, r = 10, T = 4 and N(10, 1) initial
// states.

#include "lqgfg/finite_game.hpp"
#include "lqgfg/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lqgfg {

enum class ScenarioKind { Multipartite, Sinusoidal, Custom };

enum class InitKind {
    Gaussian,  ///< i.i.d. N(mu, sigma2); the limit uses mu * 1
    Profile,   ///< x0(gamma) = mu + amplitude * cos(2 pi gamma)
    File,      ///< step profile read from x0_file (whitespace separated values)
};

struct RunConfig {
    ScenarioKind scenario = ScenarioKind::Multipartite;
    Eigen::MatrixXd block_weights = multipartite_block_weights();
    GridPoints sampling = GridPoints::Midpoint;
    std::string adjacency_file;
    std::string limit_file;

    GameParams params;
    InitKind init = InitKind::Gaussian;
    double mu = 10.0;
    double sigma2 = 1.0;
    double amplitude = 1.0;
    std::string x0_file;

    /// Population sizes N; multipartite sizes must be multiples of the
    /// community count.
    std::vector<std::size_t> populations{90};
    std::size_t replicas = 200;
    std::uint64_t seed = 1;
    std::string out = "out";
    /// 1-based agent indices for nash-gap; empty means every agent.
    std::vector<std::size_t> agents;
    double rank_tol = kDefaultRankTol;
    int quad_grid = kDefaultQuadratureGrid;
    int jobs = 0;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

/// Parses "key = value" lines. Unknown keys and malformed values throw
/// ConfigError naming the line.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
/// Applies one key/value pair (shared by files, flags and the environment).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Limit graphon of the scenario (independent of N for the built-in ones).
FiniteRankGraphon scenario_limit(const RunConfig& config);
/// Graph of size n for the scenario.
StepGraphon scenario_graph(const RunConfig& config, std::size_t n);
InitialCondition scenario_init(const RunConfig& config);
FiniteGameConfig game_config(const RunConfig& config, std::size_t n);

/// Small CSV table: header plus numeric rows, written with 17 significant
/// digits so a round trip is exact.
struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd rows;
};
void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

enum class Command { LimitSolve, Check, Simulate, NashGap, Sweep };
Command parse_command(const std::string& name);

/// Runs one command and writes its outputs under config.out. Throws
/// ConfigError, FiniteEscape or BlowUp; the CLI maps them to exit codes.
void run(const RunConfig& config, Command command, std::ostream& log);

}  // namespace lqgfg
