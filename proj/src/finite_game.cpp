#include "lqgfg/finite_game.hpp"

#include "lqgfg/errors.hpp"
#include "lqgfg/kernels.hpp"
#include "lqgfg/scenarios.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lqgfg {

void FiniteGameConfig::validate() const {
    params.validate();
    if (graph.n() < 1) {
        throw ConfigError("population needs at least one agent");
    }
    if (!graph.zero_diagonal()) {
        throw ConfigError("adjacency diagonal must be zero (no self-coupling)");
    }
}

Eigen::VectorXd initial_states(const FiniteGameConfig& config, std::uint64_t replica) {
    const std::size_t n = config.n();
    if (config.init.is_gaussian()) {
        const GaussianInit& g = config.init.gaussian();
        return gaussian_init(n, g.mu, g.sigma2, replica_seed(config.seed, replica));
    }
    return config.init.deterministic().x0.cell_averages(n, aligned_grid(n));
}

LimitSolution strategy_solution(const FiniteGameConfig& config) {
    config.validate();
    if (config.init.is_gaussian()) {
        return solve_limit(config.params, config.limit, config.init);
    }
    const InitialCondition realised =
        InitialCondition::deterministic(StepFunction(initial_states(config)));
    return solve_limit(config.params, config.limit, realised);
}

namespace {

void require_same_grid(const FiniteGameConfig& config, const LimitSolution& sol) {
    if (!(config.params.grid() == sol.grid())) {
        throw DimensionMismatch("limit solution and game config use different time grids");
    }
}

void require_agent(std::size_t i, std::size_t n) {
    if (i >= n) {
        throw OutOfRange("agent " + std::to_string(i) + " outside population of " +
                         std::to_string(n));
    }
}

// d x grid matrix of the coefficients of one family (z or s).
Eigen::MatrixXd stacked(const std::vector<Trajectory>& parts, const TimeGrid& grid) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(parts.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t l = 0; l < parts.size(); ++l) {
        out.row(static_cast<Eigen::Index>(l)) = parts[l].values().row(0);
    }
    return out;
}

Trajectory cell_field(const LimitSolution& sol, const std::vector<Trajectory>& parts, std::size_t n) {
    if (n < 1) {
        throw OutOfRange("population size must be positive");
    }
    const auto size = static_cast<Eigen::Index>(n);
    if (sol.rank() == 0) {
        return {sol.grid(), Eigen::MatrixXd::Zero(size, static_cast<Eigen::Index>(sol.grid().size()))};
    }
    const Eigen::MatrixXd cells = sol.graphon.cell_averages(n);  // d x n
    return {sol.grid(), cells.transpose() * stacked(parts, sol.grid())};
}

double mean_stderr(const Eigen::VectorXd& samples, double* mean) {
    const auto m = static_cast<double>(samples.size());
    *mean = samples.mean();
    if (samples.size() < 2) {
        return 0.0;
    }
    const double var = (samples.array() - *mean).square().sum() / (m - 1.0);
    return std::sqrt(var / m);
}

}  // namespace

Trajectory averaged_offsets(const LimitSolution& sol, std::size_t n) { return cell_field(sol, sol.s, n); }

Trajectory limit_field_at_cells(const LimitSolution& sol, std::size_t n) { return cell_field(sol, sol.z, n); }

FiniteTrajectory simulate_strategy(const FiniteGameConfig& config, const LimitSolution& sol) {
    return simulate_strategy(config, sol, initial_states(config));
}

FiniteTrajectory simulate_strategy(const FiniteGameConfig& config, const LimitSolution& sol,
                                   const Eigen::VectorXd& x0) {
    config.validate();
    require_same_grid(config, sol);
    const std::size_t n = config.n();
    if (static_cast<std::size_t>(x0.size()) != n) {
        throw DimensionMismatch("initial state has " + std::to_string(x0.size()) +
                                " entries for " + std::to_string(n) + " agents");
    }
    const GameParams& p = config.params;
    const double b = p.control_gain();
    const Eigen::MatrixXd coupling = (p.eta / static_cast<double>(n)) * config.graph.weights();
    Trajectory offsets = averaged_offsets(sol, n);

    const VectorField field = [&](double t, const Eigen::VectorXd& x) {
        const double drift = p.alpha - b * sample_cubic_scalar(sol.pi, 0, t);
        Eigen::VectorXd dx = drift * x + b * sample_cubic(offsets, t);
        dx.noalias() += coupling * x;
        return dx;
    };
    IntegrateOptions options;
    options.blowup_threshold = p.blowup_threshold * std::sqrt(static_cast<double>(n));
    Trajectory states = integrate(field, x0, 0.0, p.horizon, p.dt, options);

    const double ratio = p.beta / p.r;
    Eigen::MatrixXd u(states.dim(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) {
        u.col(static_cast<Eigen::Index>(k)) =
            -ratio * sol.pi.scalar(k) * states.at(k) + ratio * offsets.at(k);
    }
    Trajectory controls(states.grid(), std::move(u));
    return {std::move(states), std::move(controls), std::move(offsets)};
}

Eigen::VectorXd time_weights(const TimeGrid& grid) {
    const std::size_t n = grid.steps();
    const double h = grid.dt();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    if (n == 1) {
        w << 0.5 * h, 0.5 * h;
        return w;
    }
    // Simpson on [0, m], 3/8 rule on the last three intervals when n is odd.
    const std::size_t m = n % 2 == 0 ? n : n - 3;
    for (std::size_t k = 0; k + 2 <= m; k += 2) {
        w(static_cast<Eigen::Index>(k)) += h / 3.0;
        w(static_cast<Eigen::Index>(k + 1)) += 4.0 * h / 3.0;
        w(static_cast<Eigen::Index>(k + 2)) += h / 3.0;
    }
    if (m != n) {
        const double c = 3.0 * h / 8.0;
        w(static_cast<Eigen::Index>(m)) += c;
        w(static_cast<Eigen::Index>(m + 1)) += 3.0 * c;
        w(static_cast<Eigen::Index>(m + 2)) += 3.0 * c;
        w(static_cast<Eigen::Index>(m + 3)) += c;
    }
    return w;
}

Trajectory empirical_field(const FiniteTrajectory& traj, const FiniteGameConfig& config) {
    if (static_cast<std::size_t>(traj.states.dim()) != config.n()) {
        throw DimensionMismatch("trajectory and graph sizes differ");
    }
    return {traj.states.grid(),
            kernels::parallel::scaled_product(config.graph.weights(), traj.states.values(),
                                              1.0 / static_cast<double>(config.n()))};
}

namespace {

Eigen::MatrixXd cost_integrands(const FiniteTrajectory& traj, const FiniteGameConfig& config) {
    const Trajectory field = empirical_field(traj, config);
    const Eigen::ArrayXXd miss = traj.states.values().array() - field.values().array();
    return (0.5 * (miss.square() + config.params.r * traj.controls.values().array().square())).matrix();
}

}  // namespace

double agent_cost(const FiniteTrajectory& traj, std::size_t i, const FiniteGameConfig& config) {
    require_agent(i, config.n());
    return agent_costs(traj, config)(static_cast<Eigen::Index>(i));
}

Eigen::VectorXd agent_costs(const FiniteTrajectory& traj, const FiniteGameConfig& config) {
    return cost_integrands(traj, config) * time_weights(traj.states.grid());
}

// ---------------------------------------------------------------------------
// Exact best response.
//
// With A_N = V diag(lambda) V' and y = V' x the deviating agent's problem has
// dynamics dy/dt = (D(t) + b pi e e') y + beta e u + c(t), where
// D = (alpha - b pi) + (eta/N) lambda, e = V' e_i, c = b V'(sbar - sbar_i e_i),
// and running cost 1/2 (m'y)^2 + r/2 u^2 with m = (I - diag(lambda)/N) e.
// The value function 1/2 y'Py + g'y + h solves
//   -dP/dt = DP + PD + b pi (e k' + k e') - b k k' + m m',   k = P e
//   -dg/dt = D g + b pi e (e'g) - b k (e'g) + P c
//   -dh/dt = g'c - (b/2) (e'g)^2
// with zero terminal data.

struct BestResponseProblem::Data {
    GameParams params;
    Trajectory pi;
    Eigen::MatrixXd basis;     // V
    Eigen::VectorXd lambda;    // eigenvalues of A_N
    Trajectory offsets;        // sbar, N x grid
    Trajectory offsets_rot;    // V' sbar, N x grid
};

BestResponseProblem::BestResponseProblem(const FiniteGameConfig& config, const LimitSolution& sol) {
    config.validate();
    require_same_grid(config, sol);
    auto data = std::make_shared<Data>();
    data->params = config.params;
    data->pi = sol.pi;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(config.graph.weights());
    data->basis = eig.eigenvectors();
    data->lambda = eig.eigenvalues();
    data->offsets = averaged_offsets(sol, config.n());
    data->offsets_rot = Trajectory(sol.grid(), data->basis.transpose() * data->offsets.values());
    data_ = std::move(data);
}

BestResponse BestResponseProblem::solve(std::size_t agent) const {
    const Data& d = *data_;
    const auto n = d.basis.rows();
    require_agent(agent, static_cast<std::size_t>(n));
    const GameParams& p = d.params;
    const double b = p.control_gain();
    const double inv_n = 1.0 / static_cast<double>(n);

    BestResponse out;
    out.data_ = data_;
    out.agent_ = agent;
    out.e_ = d.basis.row(static_cast<Eigen::Index>(agent)).transpose();
    const Eigen::VectorXd e = out.e_;
    const Eigen::VectorXd m = (1.0 - inv_n * d.lambda.array()).matrix().cwiseProduct(e);
    const Eigen::MatrixXd mm = m * m.transpose();
    const auto i = static_cast<Eigen::Index>(agent);
    const Eigen::Index nn = n * n;

    const VectorField field = [&](double t, const Eigen::VectorXd& y) {
        const double pi_t = sample_cubic_scalar(d.pi, 0, t);
        const Eigen::ArrayXd diag = (p.alpha - b * pi_t) + p.eta * inv_n * d.lambda.array();
        const Eigen::Map<const Eigen::MatrixXd> pm(y.data(), n, n);
        const auto g = y.segment(nn, n);
        const Eigen::VectorXd k = pm * e;
        const double eg = e.dot(g);
        const Eigen::VectorXd c =
            b * (sample_cubic(d.offsets_rot, t) - sample_cubic_scalar(d.offsets, i, t) * e);

        Eigen::VectorXd dy(y.size());
        Eigen::Map<Eigen::MatrixXd> dp(dy.data(), n, n);
        dp = (diag.matrix().asDiagonal() * pm) + (pm * diag.matrix().asDiagonal());
        dp.noalias() += (b * pi_t) * (e * k.transpose() + k * e.transpose());
        dp.noalias() -= b * (k * k.transpose());
        dp += mm;
        dp = -dp;
        dy.segment(nn, n) = -(diag.matrix().cwiseProduct(g) + (b * pi_t * eg) * e - (b * eg) * k + pm * c);
        dy(nn + n) = -(g.dot(c) - 0.5 * b * eg * eg);
        return dy;
    };

    IntegrateOptions options;
    options.blowup_threshold = p.blowup_threshold * static_cast<double>(n);
    options.post_step = [n](Eigen::VectorXd& y) {
        Eigen::Map<Eigen::MatrixXd> pm(y.data(), n, n);
        const Eigen::MatrixXd sym = 0.5 * (pm + pm.transpose());
        pm = sym;
    };
    const TimeGrid grid = p.grid();
    Eigen::MatrixXd feedback(2 * n, static_cast<Eigen::Index>(grid.size()));
    integrate_observed(
        field, Eigen::VectorXd::Zero(nn + n + 1), grid, true,
        [&](std::size_t k, double, const Eigen::VectorXd& y) {
            const Eigen::Map<const Eigen::MatrixXd> pm(y.data(), n, n);
            feedback.col(static_cast<Eigen::Index>(k)).head(n) = pm * e;
            feedback.col(static_cast<Eigen::Index>(k)).tail(n) = y.segment(nn, n);
            if (k == 0) {
                out.p0_ = pm;
                out.g0_ = y.segment(nn, n);
                out.h0_ = y(nn + n);
            }
        },
        options);
    out.feedback_ = Trajectory(grid, std::move(feedback));
    return out;
}

double BestResponse::cost(const Eigen::VectorXd& x0) const {
    if (x0.size() != data_->basis.rows()) {
        throw DimensionMismatch("initial state size does not match the population");
    }
    const Eigen::VectorXd y0 = data_->basis.transpose() * x0;
    return 0.5 * y0.dot(p0_ * y0) + g0_.dot(y0) + h0_;
}

void BestResponse::simulate(const Eigen::VectorXd& x0, Trajectory* control, Trajectory* states) const {
    if (x0.size() != data_->basis.rows()) {
        throw DimensionMismatch("initial state size does not match the population");
    }
    const BestResponseProblem::Data& d = *data_;
    const GameParams& p = d.params;
    const double b = p.control_gain();
    const Eigen::Index n = d.basis.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto i = static_cast<Eigen::Index>(agent_);
    const Eigen::VectorXd& e = e_;

    auto input = [&](double t, const Eigen::VectorXd& y) {
        const Eigen::VectorXd fb = sample_cubic(feedback_, t);
        return -(p.beta / p.r) * (fb.head(n).dot(y) + e.dot(fb.tail(n)));
    };
    const VectorField field = [&](double t, const Eigen::VectorXd& y) {
        const double pi_t = sample_cubic_scalar(d.pi, 0, t);
        const Eigen::ArrayXd diag = (p.alpha - b * pi_t) + p.eta * inv_n * d.lambda.array();
        const Eigen::VectorXd c =
            b * (sample_cubic(d.offsets_rot, t) - sample_cubic_scalar(d.offsets, i, t) * e);
        return Eigen::VectorXd(diag.matrix().cwiseProduct(y) + (b * pi_t * e.dot(y)) * e +
                               (p.beta * input(t, y)) * e + c);
    };
    IntegrateOptions options;
    options.blowup_threshold = p.blowup_threshold * std::sqrt(static_cast<double>(n));
    const Trajectory rotated = integrate(field, d.basis.transpose() * x0, 0.0, p.horizon, p.dt, options);

    if (control != nullptr) {
        Eigen::MatrixXd u(1, static_cast<Eigen::Index>(rotated.size()));
        for (std::size_t k = 0; k < rotated.size(); ++k) {
            const auto fb = feedback_.at(k);
            u(0, static_cast<Eigen::Index>(k)) =
                -(p.beta / p.r) * (fb.head(n).dot(rotated.at(k)) + e.dot(fb.tail(n)));
        }
        *control = Trajectory(rotated.grid(), std::move(u));
    }
    if (states != nullptr) {
        *states = Trajectory(rotated.grid(), d.basis * rotated.values());
    }
}

Trajectory BestResponse::control(const Eigen::VectorXd& x0) const {
    Trajectory out;
    simulate(x0, &out, nullptr);
    return out;
}

Trajectory BestResponse::states(const Eigen::VectorXd& x0) const {
    Trajectory out;
    simulate(x0, nullptr, &out);
    return out;
}

BestResponseResult exact_best_response(const FiniteGameConfig& config, const LimitSolution& sol,
                                       std::size_t i) {
    return exact_best_response(config, sol, i, initial_states(config));
}

BestResponseResult exact_best_response(const FiniteGameConfig& config, const LimitSolution& sol,
                                       std::size_t i, const Eigen::VectorXd& x0) {
    const BestResponse br = BestResponseProblem(config, sol).solve(i);
    return {br.cost(x0), br.control(x0)};
}

// ---------------------------------------------------------------------------

GapReport nash_gap(const FiniteGameConfig& config, const LimitSolution& sol, const GapOptions& options) {
    config.validate();
    const std::size_t n = config.n();
    GapReport report;
    if (options.agents.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            report.agents.push_back(i);
        }
    } else {
        for (std::size_t i : options.agents) {
            require_agent(i, n);
        }
        report.agents = options.agents;
    }
    const std::size_t count = report.agents.size();
    const std::size_t replicas = config.init.is_gaussian() ? options.replicas : 1;
    if (replicas < 1) {
        throw ConfigError("Monte Carlo needs at least one replica");
    }
    report.replicas = replicas;

    // Initial states and strategy costs per replica (rows: replicas).
    Eigen::MatrixXd x0s(static_cast<Eigen::Index>(replicas), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd strategy(static_cast<Eigen::Index>(replicas), static_cast<Eigen::Index>(count));
    kernels::parallel_for(replicas, [&](std::size_t r) {
        const Eigen::VectorXd x0 = initial_states(config, r);
        const Eigen::VectorXd costs = agent_costs(simulate_strategy(config, sol, x0), config);
        x0s.row(static_cast<Eigen::Index>(r)) = x0.transpose();
        for (std::size_t a = 0; a < count; ++a) {
            strategy(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) =
                costs(static_cast<Eigen::Index>(report.agents[a]));
        }
    });

    const BestResponseProblem problem(config, sol);
    Eigen::MatrixXd best(static_cast<Eigen::Index>(replicas), static_cast<Eigen::Index>(count));
    kernels::parallel_for(count, [&](std::size_t a) {
        const BestResponse br = problem.solve(report.agents[a]);
        for (std::size_t r = 0; r < replicas; ++r) {
            best(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) =
                br.cost(x0s.row(static_cast<Eigen::Index>(r)).transpose());
        }
    });

    const Eigen::MatrixXd gaps = strategy - best;
    const auto cnt = static_cast<Eigen::Index>(count);
    report.strategy_cost.resize(cnt);
    report.best_response_cost.resize(cnt);
    report.gap.resize(cnt);
    report.gap_stderr.resize(cnt);
    for (Eigen::Index a = 0; a < cnt; ++a) {
        double mean = 0.0;
        report.gap_stderr(a) = mean_stderr(gaps.col(a), &mean);
        report.gap(a) = mean;
        report.strategy_cost(a) = strategy.col(a).mean();
        report.best_response_cost(a) = best.col(a).mean();
    }
    if (count > 0) {
        report.mean_gap_stderr = mean_stderr(gaps.rowwise().mean(), &report.mean_gap);
    }
    return report;
}

CostStats monte_carlo_costs(const FiniteGameConfig& config, const LimitSolution& sol,
                            std::size_t replicas, std::uint64_t seed) {
    if (!config.init.is_gaussian()) {
        throw ConfigError("Monte Carlo costs need a Gaussian initial condition");
    }
    if (replicas < 1) {
        throw ConfigError("Monte Carlo needs at least one replica");
    }
    FiniteGameConfig seeded = config;
    seeded.seed = seed;
    seeded.validate();
    const auto n = static_cast<Eigen::Index>(config.n());
    Eigen::MatrixXd costs(static_cast<Eigen::Index>(replicas), n);
    kernels::parallel_for(replicas, [&](std::size_t r) {
        const Eigen::VectorXd x0 = initial_states(seeded, r);
        costs.row(static_cast<Eigen::Index>(r)) =
            agent_costs(simulate_strategy(seeded, sol, x0), seeded).transpose();
    });
    CostStats stats;
    stats.replicas = replicas;
    stats.mean.resize(n);
    stats.stderr_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mean = 0.0;
        stats.stderr_(i) = mean_stderr(costs.col(i), &mean);
        stats.mean(i) = mean;
    }
    return stats;
}

// Scalar tracking problem of one agent:
//   dx/dt = alpha x + eta v(t) + beta u,  cost 1/2 int (x - zbar)^2 + r u^2,
// value 1/2 pi x^2 - s x + q with
//   -ds/dt = (alpha - b pi) s + zbar - eta pi v,   -dq/dt = zbar^2/2 - (b/2) s^2 - eta s v.
TrackingGap tracking_gap(const FiniteGameConfig& config, const LimitSolution& sol,
                         const FiniteTrajectory& traj, std::size_t i) {
    config.validate();
    require_same_grid(config, sol);
    require_agent(i, config.n());
    const GameParams& p = config.params;
    const double b = p.control_gain();
    const auto row = static_cast<Eigen::Index>(i);

    const Trajectory field = empirical_field(traj, config);
    const Trajectory target = limit_field_at_cells(sol, config.n());
    Eigen::MatrixXd inputs(2, static_cast<Eigen::Index>(field.size()));
    inputs.row(0) = field.values().row(row);
    inputs.row(1) = target.values().row(row);
    const Trajectory exo(field.grid(), std::move(inputs));

    const VectorField backward = [&](double t, const Eigen::VectorXd& y) {
        const double pi_t = sample_cubic_scalar(sol.pi, 0, t);
        const double v = sample_cubic_scalar(exo, 0, t);
        const double zbar = sample_cubic_scalar(exo, 1, t);
        Eigen::VectorXd dy(2);
        dy(0) = -((p.alpha - b * pi_t) * y(0) + zbar - p.eta * pi_t * v);
        dy(1) = -(0.5 * zbar * zbar - 0.5 * b * y(0) * y(0) - p.eta * y(0) * v);
        return dy;
    };
    IntegrateOptions options;
    options.blowup_threshold = p.blowup_threshold;
    const Trajectory sq = integrate(backward, Eigen::VectorXd::Zero(2), p.horizon, 0.0, p.dt, options);

    const double x0 = traj.states(row, 0);
    TrackingGap out;
    out.optimal_cost = 0.5 * sol.pi.front() * x0 * x0 - sq(0, 0) * x0 + sq(1, 0);

    const Eigen::VectorXd w = time_weights(traj.states.grid());
    const Eigen::ArrayXd miss =
        (traj.states.values().row(row) - target.values().row(row)).transpose().array();
    const Eigen::ArrayXd u = traj.controls.values().row(row).transpose().array();
    out.strategy_cost = 0.5 * (w.array() * (miss.square() + p.r * u.square())).sum();
    return out;
}

}  // namespace lqgfg
