#include "lqgfg/errors.hpp"
#include "lqgfg/finite_game.hpp"
#include "lqgfg/scenarios.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lqgfg;

namespace {

FiniteGameConfig make_config(const Eigen::MatrixXd& a, const InitialCondition& init, double horizon = 4.0,
                             double dt = 1e-3) {
    FiniteGameConfig c;
    c.params.horizon = horizon;
    c.params.dt = dt;
    c.graph = StepGraphon::from_matrix(a, 1.0);
    c.init = init;
    c.limit = spectrum(c.graph);
    c.seed = 11;
    return c;
}

InitialCondition cosine_profile() {
    return InitialCondition::deterministic([](double x) { return 10.0 + std::cos(2.0 * std::numbers::pi * x); },
                                           [](double x) {
                                               return 10.0 * x + std::sin(2.0 * std::numbers::pi * x) /
                                                                     (2.0 * std::numbers::pi);
                                           });
}

}  // namespace

TEST_CASE("time weights integrate cubics exactly") {
    auto p = [](double t) { return t * t * t - 2.0 * t + 0.5; };
    for (const TimeGrid& grid : {TimeGrid(0.0, 2.0, 0.25), TimeGrid(0.0, 1.0, 0.2), TimeGrid(0.0, 1.4, 0.2)}) {
        const Eigen::VectorXd w = time_weights(grid);
        double sum = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            sum += w(static_cast<Eigen::Index>(k)) * p(grid.time(k));
        }
        const double h = grid.t1();
        CHECK(sum == doctest::Approx(h * h * h * h / 4.0 - h * h + 0.5 * h).epsilon(1e-13));
    }
}

TEST_CASE("graphs with self loops are rejected") {
    FiniteGameConfig c = make_config(Eigen::MatrixXd::Zero(2, 2), cosine_profile());
    c.graph = StepGraphon::from_matrix(Eigen::MatrixXd::Identity(2, 2), 1.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("agent cost of a constant unit state with no neighbours") {
    const FiniteGameConfig c = make_config(Eigen::MatrixXd::Zero(2, 2), cosine_profile(), 4.0, 0.01);
    const TimeGrid grid = c.params.grid();
    const auto cols = static_cast<Eigen::Index>(grid.size());
    const FiniteTrajectory traj{Trajectory(grid, Eigen::MatrixXd::Ones(2, cols)),
                                Trajectory(grid, Eigen::MatrixXd::Zero(2, cols)),
                                Trajectory(grid, Eigen::MatrixXd::Zero(2, cols))};
    CHECK(agent_cost(traj, 0, c) == doctest::Approx(2.0).epsilon(1e-14));

    // u = 1 adds r T / 2 = 20.
    const FiniteTrajectory steered{traj.states, Trajectory(grid, Eigen::MatrixXd::Ones(2, cols)), traj.offsets};
    CHECK(agent_cost(steered, 1, c) == doctest::Approx(22.0).epsilon(1e-14));
    CHECK(agent_costs(steered, c)(0) == agent_cost(steered, 0, c));
}

TEST_CASE("empirical field of a complete graph") {
    const std::size_t n = 5;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5);
    const FiniteGameConfig c = make_config(a, cosine_profile(), 1.0, 0.1);
    const TimeGrid grid = c.params.grid();
    const auto cols = static_cast<Eigen::Index>(grid.size());
    const FiniteTrajectory traj{Trajectory(grid, Eigen::MatrixXd::Constant(5, cols, 3.0)),
                                Trajectory(grid, Eigen::MatrixXd::Zero(5, cols)),
                                Trajectory(grid, Eigen::MatrixXd::Zero(5, cols))};
    const Trajectory z = empirical_field(traj, c);
    CHECK((z.values().array() - 3.0 * (n - 1) / static_cast<double>(n)).abs().maxCoeff() < 1e-14);
}

TEST_CASE("averaged offsets are cell averages of the offset field") {
    GameParams p;
    p.dt = 1e-2;
    const LimitSolution sol = solve_limit(p, sinusoidal_limit(), cosine_profile());
    const Trajectory avg = averaged_offsets(sol, 7);
    for (std::size_t k : {std::size_t{0}, std::size_t{150}}) {
        for (std::size_t i = 0; i < 7; ++i) {
            double expected = 0.0;
            for (std::size_t l = 0; l < sol.rank(); ++l) {
                expected += sol.s[l].scalar(k) * sol.graphon.eigenfunction(l).cell_average(i, 7);
            }
            CHECK(avg.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("deterministic initial states are cell averages") {
    const FiniteGameConfig c = make_config(Eigen::MatrixXd::Zero(4, 4), cosine_profile());
    const Eigen::VectorXd x0 = initial_states(c);
    // Cell 1 of 4: 10 + (sin(pi/2) - 0) / (2 pi) * 4.
    CHECK(x0(0) == doctest::Approx(10.0 + 2.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(x0.sum() == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("strategy controls are the limit feedback") {
    const MultipartiteScenario s = multipartite(2, multipartite_block_weights());
    FiniteGameConfig c = make_config(s.graph.weights(), InitialCondition::gaussian(10.0, 1.0), 2.0, 1e-3);
    c.limit = s.limit;
    const LimitSolution sol = strategy_solution(c);
    const FiniteTrajectory traj = simulate_strategy(c, sol);
    const double k = c.params.beta / c.params.r;
    double worst = 0.0;
    for (std::size_t t = 0; t < traj.states.size(); t += 100) {
        const Eigen::VectorXd expected =
            -k * (sol.pi.scalar(t) * traj.states.at(t) - traj.offsets.at(t));
        worst = std::max(worst, (traj.controls.at(t) - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("a single agent with no field solves a scalar LQR") {
    FiniteGameConfig c = make_config(Eigen::MatrixXd::Zero(1, 1),
                                     InitialCondition::deterministic(StepFunction(Eigen::VectorXd::Constant(1, 2.0))));
    c.params.eta = 0.0;
    const LimitSolution sol = strategy_solution(c);
    CHECK(sol.rank() == 0);
    const BestResponseResult br = exact_best_response(c, sol, 0);
    const double expected = 0.5 * oracle::riccati_pi(c.params.alpha, c.params.control_gain(), c.params.horizon, 0.0) * 4.0;
    CHECK(br.cost == doctest::Approx(expected).epsilon(1e-10));
    const GapReport gap = nash_gap(c, sol);
    CHECK(std::abs(gap.gap(0)) < 1e-8);
    CHECK(gap.strategy_cost(0) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("best response matches a direct quadratic-program minimisation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            a(i, j) = a(j, i) = u(rng);
        }
    }
    const FiniteGameConfig c = make_config(a, cosine_profile(), 1.0, 1e-3);
    const LimitSolution sol = strategy_solution(c);
    const Trajectory offsets = averaged_offsets(sol, 3);
    const Eigen::VectorXd x0 = initial_states(c);
    for (std::size_t agent = 0; agent < 3; ++agent) {
        oracle::QpInstance q{c.params.alpha, c.params.beta, c.params.eta, c.params.r, c.params.horizon,
                             a, agent, x0,
                             [&](double t) { return sample_cubic_scalar(sol.pi, 0, t); },
                             [&](double t) { return sample_cubic(offsets, t); }};
        const double reference = oracle::best_response_qp(q, 500);
        const double cost = exact_best_response(c, sol, agent, x0).cost;
        CHECK(std::abs(cost - reference) <= 1e-4 * std::abs(reference));
    }
}

TEST_CASE("best response never does worse than the strategy") {
    const MultipartiteScenario s = multipartite(2, multipartite_block_weights());
    FiniteGameConfig c = make_config(s.graph.weights(), cosine_profile(), 4.0, 1e-3);
    c.limit = s.limit;
    const LimitSolution sol = strategy_solution(c);
    const GapReport report = nash_gap(c, sol);
    CHECK(report.agents.size() == 6);
    CHECK(report.gap.minCoeff() >= -1e-6);
    CHECK(report.max_gap() > 0.0);
    CHECK(report.gap_stderr.isZero());

    const BestResponse br = BestResponseProblem(c, sol).solve(2);
    const Eigen::VectorXd x0 = initial_states(c);
    CHECK(br.agent() == 2);
    CHECK(br.cost(x0) == doctest::Approx(report.best_response_cost(2)).epsilon(1e-12));
    CHECK((br.states(x0).at(0) - x0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(br.control(x0).size() == c.params.grid().size());
}

TEST_CASE("Monte Carlo costs") {
    const MultipartiteScenario s = multipartite(1, multipartite_block_weights());
    FiniteGameConfig c = make_config(s.graph.weights(), InitialCondition::gaussian(10.0, 0.0), 1.0, 1e-2);
    c.limit = s.limit;
    const LimitSolution sol = strategy_solution(c);
    const CostStats flat = monte_carlo_costs(c, sol, 5, 3);
    CHECK(flat.stderr_.isZero());
    CHECK(flat.replicas == 5);

    c.init = InitialCondition::gaussian(10.0, 1.0);
    const CostStats a = monte_carlo_costs(c, sol, 8, 3);
    const CostStats b = monte_carlo_costs(c, sol, 8, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.stderr_.minCoeff() > 0.0);
}

TEST_CASE("Gaussian gaps are reproducible and carry standard errors") {
    const MultipartiteScenario s = multipartite(1, multipartite_block_weights());
    FiniteGameConfig c = make_config(s.graph.weights(), InitialCondition::gaussian(10.0, 1.0), 1.0, 1e-2);
    c.limit = s.limit;
    const LimitSolution sol = strategy_solution(c);
    GapOptions options;
    options.replicas = 6;
    options.agents = {0, 2};
    const GapReport one = nash_gap(c, sol, options);
    const GapReport two = nash_gap(c, sol, options);
    CHECK(one.gap == two.gap);
    CHECK(one.agents.size() == 2);
    CHECK(one.replicas == 6);
    CHECK(one.gap_stderr.minCoeff() > 0.0);
    CHECK(one.gap.minCoeff() >= -1e-6);
}

TEST_CASE("tracking diagnostic is nonnegative") {
    const StepGraphon g = sampled_graphon(8, sinusoidal_kernel);
    FiniteGameConfig c = make_config(g.weights(), cosine_profile(), 4.0, 1e-3);
    c.limit = sinusoidal_limit();
    const LimitSolution sol = strategy_solution(c);
    const FiniteTrajectory traj = simulate_strategy(c, sol);
    for (std::size_t i = 0; i < 8; i += 3) {
        const TrackingGap t = tracking_gap(c, sol, traj, i);
        CHECK(t.gap() >= -1e-6);
        CHECK(t.optimal_cost > 0.0);
    }
    CHECK_THROWS_AS((void)tracking_gap(c, sol, traj, 8), OutOfRange);
}
