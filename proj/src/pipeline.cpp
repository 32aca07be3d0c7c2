#include "lqgfg/pipeline.hpp"

#include "lqgfg/errors.hpp"
#include "lqgfg/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace lqgfg {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (trim(value.substr(used)).empty() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + value + "'");
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
    }
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::string cleaned = value;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
    std::istringstream in(cleaned);
    std::vector<std::string> out;
    for (std::string item; in >> item;) {
        out.push_back(item);
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    if (populations.empty()) {
        throw ConfigError("populations: the sweep list is empty");
    }
    for (std::size_t n : populations) {
        if (n < 1) {
            throw ConfigError("populations: sizes must be positive");
        }
        if (scenario == ScenarioKind::Multipartite &&
            n % static_cast<std::size_t>(block_weights.rows()) != 0) {
            throw ConfigError("populations: multipartite size " + std::to_string(n) +
                              " is not a multiple of the community count " +
                              std::to_string(block_weights.rows()));
        }
    }
    if (scenario == ScenarioKind::Custom && adjacency_file.empty()) {
        throw ConfigError("scenario custom needs adjacency_file");
    }
    if (init == InitKind::File && x0_file.empty()) {
        throw ConfigError("init = file needs x0_file");
    }
    if (!(sigma2 >= 0.0)) {
        throw ConfigError("sigma2 must be nonnegative");
    }
    if (replicas < 1) {
        throw ConfigError("replicas must be at least 1");
    }
    if (quad_grid < 1) {
        throw ConfigError("quad_grid must be positive");
    }
    if (!(rank_tol >= 0.0)) {
        throw ConfigError("rank_tol must be nonnegative");
    }
    for (std::size_t a : agents) {
        if (a < 1) {
            throw ConfigError("agents are 1-based indices");
        }
    }
}

void apply_setting(RunConfig& config, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "scenario") {
        if (value == "multipartite") {
            config.scenario = ScenarioKind::Multipartite;
        } else if (value == "sinusoidal") {
            config.scenario = ScenarioKind::Sinusoidal;
        } else if (value == "custom") {
            config.scenario = ScenarioKind::Custom;
        } else {
            throw ConfigError("scenario: expected multipartite, sinusoidal or custom, got '" + value + "'");
        }
    } else if (key == "block_weights") {
        const auto items = split_list(value);
        const auto k = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(items.size()))));
        if (k < 1 || static_cast<std::size_t>(k * k) != items.size()) {
            throw ConfigError("block_weights: expected k*k numbers in row-major order");
        }
        Eigen::MatrixXd w(k, k);
        for (Eigen::Index i = 0; i < k * k; ++i) {
            w(i / k, i % k) = to_double(key, items[static_cast<std::size_t>(i)]);
        }
        config.block_weights = w;
    } else if (key == "sampling") {
        if (value == "midpoint") {
            config.sampling = GridPoints::Midpoint;
        } else if (value == "endpoint") {
            config.sampling = GridPoints::Endpoint;
        } else {
            throw ConfigError("sampling: expected midpoint or endpoint, got '" + value + "'");
        }
    } else if (key == "adjacency_file") {
        config.adjacency_file = value;
    } else if (key == "limit_file") {
        config.limit_file = value;
    } else if (key == "alpha") {
        config.params.alpha = to_double(key, value);
    } else if (key == "beta") {
        config.params.beta = to_double(key, value);
    } else if (key == "eta") {
        config.params.eta = to_double(key, value);
    } else if (key == "r") {
        config.params.r = to_double(key, value);
    } else if (key == "horizon" || key == "T") {
        config.params.horizon = to_double(key, value);
    } else if (key == "dt") {
        config.params.dt = to_double(key, value);
    } else if (key == "blowup_threshold") {
        config.params.blowup_threshold = to_double(key, value);
    } else if (key == "init") {
        if (value == "gaussian") {
            config.init = InitKind::Gaussian;
        } else if (value == "profile") {
            config.init = InitKind::Profile;
        } else if (value == "file") {
            config.init = InitKind::File;
        } else {
            throw ConfigError("init: expected gaussian, profile or file, got '" + value + "'");
        }
    } else if (key == "mu") {
        config.mu = to_double(key, value);
    } else if (key == "sigma2") {
        config.sigma2 = to_double(key, value);
    } else if (key == "amplitude") {
        config.amplitude = to_double(key, value);
    } else if (key == "x0_file") {
        config.x0_file = value;
    } else if (key == "populations") {
        config.populations.clear();
        for (const auto& item : split_list(value)) {
            config.populations.push_back(static_cast<std::size_t>(to_unsigned(key, item)));
        }
    } else if (key == "replicas") {
        config.replicas = static_cast<std::size_t>(to_unsigned(key, value));
    } else if (key == "seed") {
        config.seed = to_unsigned(key, value);
    } else if (key == "out") {
        config.out = value;
    } else if (key == "agents") {
        config.agents.clear();
        for (const auto& item : split_list(value)) {
            config.agents.push_back(static_cast<std::size_t>(to_unsigned(key, item)));
        }
    } else if (key == "rank_tol") {
        config.rank_tol = to_double(key, value);
    } else if (key == "quad_grid") {
        config.quad_grid = static_cast<int>(to_unsigned(key, value));
    } else if (key == "jobs") {
        config.jobs = static_cast<int>(to_unsigned(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        try {
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(in, std::move(base));
}

// ---------------------------------------------------------------------------

FiniteRankGraphon scenario_limit(const RunConfig& config) {
    switch (config.scenario) {
    case ScenarioKind::Multipartite:
        return spectrum(StepGraphon::from_matrix(config.block_weights, 1.0), config.rank_tol);
    case ScenarioKind::Sinusoidal:
        return sinusoidal_limit();
    case ScenarioKind::Custom:
        if (!config.limit_file.empty()) {
            return read_spectral(config.limit_file);
        }
        return spectrum(StepGraphon::from_matrix(read_adjacency(config.adjacency_file), 1.0),
                        config.rank_tol);
    }
    throw ConfigError("unknown scenario");
}

StepGraphon scenario_graph(const RunConfig& config, std::size_t n) {
    switch (config.scenario) {
    case ScenarioKind::Multipartite: {
        const auto k = static_cast<std::size_t>(config.block_weights.rows());
        if (n % k != 0) {
            throw ConfigError("multipartite size " + std::to_string(n) + " is not a multiple of " +
                              std::to_string(k));
        }
        return multipartite(n / k, config.block_weights).graph;
    }
    case ScenarioKind::Sinusoidal:
        return sampled_graphon(n, sinusoidal_kernel, config.sampling);
    case ScenarioKind::Custom: {
        StepGraphon g = StepGraphon::from_matrix(read_adjacency(config.adjacency_file), 1.0);
        if (g.n() != n) {
            throw ConfigError("adjacency file has N = " + std::to_string(g.n()) +
                              " but population " + std::to_string(n) + " was requested");
        }
        return g;
    }
    }
    throw ConfigError("unknown scenario");
}

InitialCondition scenario_init(const RunConfig& config) {
    switch (config.init) {
    case InitKind::Gaussian:
        return InitialCondition::gaussian(config.mu, config.sigma2);
    case InitKind::Profile: {
        using std::numbers::pi;
        const double mu = config.mu;
        const double amp = config.amplitude;
        return InitialCondition::deterministic(
            [mu, amp](double x) { return mu + amp * std::cos(2.0 * pi * x); },
            [mu, amp](double x) { return mu * x + amp * std::sin(2.0 * pi * x) / (2.0 * pi); });
    }
    case InitKind::File: {
        std::ifstream in(config.x0_file);
        if (!in) {
            throw ConfigError("cannot open x0_file " + config.x0_file);
        }
        std::vector<double> values;
        for (double v = 0.0; in >> v;) {
            values.push_back(v);
        }
        if (values.empty()) {
            throw ConfigError("x0_file " + config.x0_file + " holds no values");
        }
        return InitialCondition::deterministic(
            StepFunction(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))));
    }
    }
    throw ConfigError("unknown init");
}

FiniteGameConfig game_config(const RunConfig& config, std::size_t n) {
    FiniteGameConfig game;
    game.params = config.params;
    game.graph = scenario_graph(config, n);
    game.init = scenario_init(config);
    game.limit = scenario_limit(config);
    game.seed = config.seed;
    game.validate();
    return game;
}

// ---------------------------------------------------------------------------

void write_table(const std::string& path, const Table& table) {
    if (static_cast<std::size_t>(table.rows.cols()) != table.header.size()) {
        throw DimensionMismatch("table header and rows disagree");
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        out << (c ? "," : "") << table.header[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.rows.cols(); ++c) {
            out << (c ? "," : "") << format_double(table.rows(r, c));
        }
        out << '\n';
    }
}

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    Table table;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(path + " is empty");
    }
    {
        std::istringstream head(line);
        for (std::string cell; std::getline(head, cell, ',');) {
            table.header.push_back(trim(cell));
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        std::istringstream row(line);
        std::vector<double> values;
        for (std::string cell; std::getline(row, cell, ',');) {
            values.push_back(to_double(path, cell));
        }
        if (values.size() != table.header.size()) {
            throw Error(path + ": row width differs from the header");
        }
        rows.push_back(std::move(values));
    }
    table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return table;
}

Command parse_command(const std::string& name) {
    if (name == "limit-solve") {
        return Command::LimitSolve;
    }
    if (name == "check") {
        return Command::Check;
    }
    if (name == "simulate") {
        return Command::Simulate;
    }
    if (name == "nash-gap") {
        return Command::NashGap;
    }
    if (name == "sweep") {
        return Command::Sweep;
    }
    throw ConfigError("unknown command '" + name + "' (limit-solve, check, simulate, nash-gap, sweep)");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> contraction_margins(const LimitSolution& sol) {
    std::vector<double> out;
    for (std::size_t l = 0; l < sol.rank(); ++l) {
        out.push_back(contraction_margin(sol.graphon.eigenvalue(l), sol.pi, sol.params));
    }
    return out;
}

Table per_agent(const std::string& name, const Eigen::VectorXd& values) {
    Table t{{"agent", name}, Eigen::MatrixXd(values.size(), 2)};
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        t.rows(i, 0) = static_cast<double>(i + 1);
        t.rows(i, 1) = values(i);
    }
    return t;
}

fs::path population_dir(const RunConfig& config, std::size_t n) {
    const fs::path dir = fs::path(config.out) / ("N" + std::to_string(n));
    fs::create_directories(dir);
    return dir;
}

double grid_for(const RunConfig& config, std::size_t n) { return aligned_grid(n, config.quad_grid); }

void limit_solve(const RunConfig& config, std::ostream& log) {
    const LimitSolution sol = solve_limit(config.params, scenario_limit(config), scenario_init(config));
    const auto margins = contraction_margins(sol);
    save_limit_solution(sol, margins, config.out);
    log << "limit solution of rank " << sol.rank() << " written to " << config.out << '\n';
}

void check(const RunConfig& config, std::ostream& log) {
    const FiniteRankGraphon limit = scenario_limit(config);
    const Trajectory pi = solve_pi(config.params);
    fs::create_directories(config.out);

    Table assumptions{{"ell", "lambda", "escapes", "escape_time", "contraction_margin"},
                      Eigen::MatrixXd(static_cast<Eigen::Index>(limit.rank()), 5)};
    std::ostringstream report;
    report << "Riccati solvability and fixed-point contraction per eigendirection\n";
    std::vector<FiniteEscape> escapes;
    for (std::size_t l = 0; l < limit.rank(); ++l) {
        const double lambda = limit.eigenvalue(l);
        const auto row = static_cast<Eigen::Index>(l);
        double escape_time = std::nan("");
        try {
            (void)solve_capital_pi(lambda, pi, config.params, l);
        } catch (const FiniteEscape& e) {
            escape_time = e.time;
            escapes.push_back(e);
        }
        const double margin = contraction_margin(lambda, pi, config.params);
        const bool escaped = !std::isnan(escape_time);
        assumptions.rows.row(row) << static_cast<double>(l + 1), lambda, escaped ? 1.0 : 0.0,
            escaped ? escape_time : 0.0, margin;
        report << "  ell = " << l + 1 << "  lambda = " << format_double(lambda)
               << (escaped ? "  ESCAPES at t = " + format_double(escape_time) : "  no escape on [0, T]")
               << "  contraction margin = " << format_double(margin)
               << (margin < 1.0 ? " (< 1: unique)" : " (>= 1: uniqueness not certified)") << '\n';
    }

    Table network{{"N", "E_N", "op_norm_distance"},
                  Eigen::MatrixXd(static_cast<Eigen::Index>(config.populations.size()), 3)};
    report << "Graph to limit discrepancy per population size\n";
    for (std::size_t p = 0; p < config.populations.size(); ++p) {
        const std::size_t n = config.populations[p];
        const StepGraphon graph = scenario_graph(config, n);
        const int grid = static_cast<int>(grid_for(config, n));
        const double en = discrepancy_en(limit, graph, grid);
        const double op = op_norm_distance(limit, graph, grid);
        network.rows.row(static_cast<Eigen::Index>(p)) << static_cast<double>(n), en, op;
        report << "  N = " << n << "  E_N = " << format_double(en)
               << "  op-norm distance = " << format_double(op) << '\n';
    }

    write_table((fs::path(config.out) / "assumptions.csv").string(), assumptions);
    write_table((fs::path(config.out) / "network.csv").string(), network);
    {
        std::ofstream out(fs::path(config.out) / "report.txt");
        out << report.str();
    }
    log << report.str();
    if (!escapes.empty()) {
        throw escapes.front();
    }
}

struct SimulateResult {
    FiniteGameConfig game;
    LimitSolution sol;
    FiniteTrajectory traj;
};

SimulateResult simulate_population(const RunConfig& config, std::size_t n) {
    SimulateResult res{game_config(config, n), {}, {}};
    res.sol = strategy_solution(res.game);
    res.traj = simulate_strategy(res.game, res.sol);

    const fs::path dir = population_dir(config, n);
    const Trajectory limit_field = limit_field_at_cells(res.sol, n);
    const Trajectory empirical = empirical_field(res.traj, res.game);
    const Trajectory error(empirical.grid(), empirical.values() - limit_field.values());
    write_csv((dir / "states.csv").string(), res.traj.states, "x");
    write_csv((dir / "controls.csv").string(), res.traj.controls, "u");
    write_csv((dir / "offsets.csv").string(), res.traj.offsets, "s");
    write_csv((dir / "limit_field.csv").string(), limit_field, "z");
    write_csv((dir / "empirical_field.csv").string(), empirical, "z");
    write_csv((dir / "field_error.csv").string(), error, "e");

    const Eigen::MatrixXd& a = res.game.graph.weights();
    Table adjacency{{"agent"}, Eigen::MatrixXd(a.rows(), a.cols() + 1)};
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        adjacency.header.push_back("a" + std::to_string(j + 1));
    }
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        adjacency.rows(i, 0) = static_cast<double>(i + 1);
        adjacency.rows.row(i).tail(a.cols()) = a.row(i);
    }
    write_table((dir / "adjacency.csv").string(), adjacency);
    write_table((dir / "costs.csv").string(), per_agent("cost", agent_costs(res.traj, res.game)));
    return res;
}

GapReport gap_population(const RunConfig& config, const SimulateResult& sim, std::size_t n) {
    GapOptions options;
    options.replicas = config.replicas;
    for (std::size_t a : config.agents) {
        if (a > n) {
            throw ConfigError("agents: index " + std::to_string(a) + " exceeds N = " + std::to_string(n));
        }
        options.agents.push_back(a - 1);
    }
    const GapReport report = nash_gap(sim.game, sim.sol, options);
    const auto count = static_cast<Eigen::Index>(report.agents.size());

    Table gaps{{"agent", "strategy_cost", "best_response_cost", "gap"}, Eigen::MatrixXd(count, 4)};
    Table stderrs{{"agent", "gap_stderr"}, Eigen::MatrixXd(count, 2)};
    Table tracking{{"agent", "tracking_strategy_cost", "tracking_optimal_cost", "tracking_gap", "exact_gap"},
                   Eigen::MatrixXd(count, 5)};
    std::vector<TrackingGap> tracks(report.agents.size());
    kernels::parallel_for(report.agents.size(), [&](std::size_t a) {
        tracks[a] = tracking_gap(sim.game, sim.sol, sim.traj, report.agents[a]);
    });
    for (Eigen::Index a = 0; a < count; ++a) {
        const double agent = static_cast<double>(report.agents[static_cast<std::size_t>(a)] + 1);
        gaps.rows.row(a) << agent, report.strategy_cost(a), report.best_response_cost(a), report.gap(a);
        stderrs.rows.row(a) << agent, report.gap_stderr(a);
        const TrackingGap& t = tracks[static_cast<std::size_t>(a)];
        tracking.rows.row(a) << agent, t.strategy_cost, t.optimal_cost, t.gap(), report.gap(a);
    }
    const fs::path dir = population_dir(config, n);
    write_table((dir / "gaps.csv").string(), gaps);
    write_table((dir / "gaps_stderr.csv").string(), stderrs);
    write_table((dir / "tracking_gaps.csv").string(), tracking);
    return report;
}

}  // namespace

void run(const RunConfig& config, Command command, std::ostream& log) {
    config.validate();
    kernels::set_jobs(config.jobs);
    switch (command) {
    case Command::LimitSolve:
        limit_solve(config, log);
        return;
    case Command::Check:
        check(config, log);
        return;
    case Command::Simulate:
        for (std::size_t n : config.populations) {
            (void)simulate_population(config, n);
            log << "simulated N = " << n << " into " << population_dir(config, n).string() << '\n';
        }
        return;
    case Command::NashGap:
        for (std::size_t n : config.populations) {
            const GapReport report = gap_population(config, simulate_population(config, n), n);
            log << "N = " << n << "  max gap = " << format_double(report.max_gap())
                << "  mean gap = " << format_double(report.mean_gap) << '\n';
        }
        return;
    case Command::Sweep: {
        const auto count = config.populations.size();
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(count), 5);
        kernels::parallel_for(count, [&](std::size_t p) {
            const std::size_t n = config.populations[p];
            const SimulateResult sim = simulate_population(config, n);
            const GapReport report = gap_population(config, sim, n);
            const double en = discrepancy_en(sim.game.limit, sim.game.graph,
                                             static_cast<int>(grid_for(config, n)));
            rows.row(static_cast<Eigen::Index>(p)) << static_cast<double>(n), en, report.max_gap(),
                report.mean_gap, report.mean_gap_stderr;
        });
        fs::create_directories(config.out);
        write_table((fs::path(config.out) / "gap_vs_N.csv").string(),
                    {{"N", "E_N", "max_gap", "mean_gap"}, rows.leftCols(4)});
        write_table((fs::path(config.out) / "gap_stderr_vs_N.csv").string(),
                    {{"N", "mean_gap_stderr"}, Eigen::MatrixXd(rows(Eigen::all, {0, 4}))});
        for (Eigen::Index p = 0; p < rows.rows(); ++p) {
            log << "N = " << rows(p, 0) << "  E_N = " << format_double(rows(p, 1))
                << "  max gap = " << format_double(rows(p, 2))
                << "  mean gap = " << format_double(rows(p, 3)) << '\n';
        }
        return;
    }
    }
}

}  // namespace lqgfg
