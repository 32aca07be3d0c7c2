#pragma once

// Finite-population closed loop on a weighted graph driven by the limit
// solution, per-agent costs, and the Nash gap against an exact best response.

#include "lqgfg/graphon.hpp"
#include "lqgfg/limit_solver.hpp"
#include "lqgfg/odeint.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace lqgfg {

struct FiniteGameConfig {
    GameParams params;
    StepGraphon graph = StepGraphon::from_matrix(Eigen::MatrixXd::Zero(1, 1), 1.0);
    InitialCondition init;
    FiniteRankGraphon limit;
    std::uint64_t seed = 0;

    /// Throws ConfigError when the graph has a nonzero diagonal entry.
    void validate() const;
    [[nodiscard]] std::size_t n() const { return graph.n(); }
};

struct FiniteTrajectory {
    Trajectory states;    ///< N-vectors x_t
    Trajectory controls;  ///< N-vectors u_t
    Trajectory offsets;   ///< N-vectors of cell-averaged offsets
};

/// Initial states of replica `replica`: cell averages of a deterministic
/// profile over the N-uniform partition (step profiles with N cells are used
/// as is), or seeded Gaussian draws from replica_seed(config.seed, replica).
Eigen::VectorXd initial_states(const FiniteGameConfig& config, std::uint64_t replica = 0);

/// Limit solution used by the decentralised strategies: z_0^l from the
/// realised step profile x_0^N (deterministic init) or from mu * 1 (Gaussian
/// init). These are the only difference between the two strategies.
LimitSolution strategy_solution(const FiniteGameConfig& config);

/// Cell averages of the offset field, sum_l s^l_t avg_{P_i} f_l (N x grid).
Trajectory averaged_offsets(const LimitSolution& sol, std::size_t n);

FiniteTrajectory simulate_strategy(const FiniteGameConfig& config, const LimitSolution& sol);
FiniteTrajectory simulate_strategy(const FiniteGameConfig& config, const LimitSolution& sol,
                                   const Eigen::VectorXd& x0);

/// 1/2 int_0^T [(x^i - (1/N) sum_j a_ij x^j)^2 + r (u^i)^2] dt.
double agent_cost(const FiniteTrajectory& traj, std::size_t i, const FiniteGameConfig& config);
Eigen::VectorXd agent_costs(const FiniteTrajectory& traj, const FiniteGameConfig& config);

/// Quadrature weights on a time grid: composite Simpson, with a 3/8 panel at
/// the end when the step count is odd.
Eigen::VectorXd time_weights(const TimeGrid& grid);

/// z_t = (1/N) A_N x_t on the grid.
Trajectory empirical_field(const FiniteTrajectory& traj, const FiniteGameConfig& config);

/// Cell averages of the reconstructed limit field, zbar^i_t (N x grid).
Trajectory limit_field_at_cells(const LimitSolution& sol, std::size_t n);

/// Agent i's unilateral deviation problem with every other agent fixed on
/// the strategy feedback. Shared data (eigenbasis of A_N, offsets in that
/// basis) is computed once per (config, solution) and reused for every agent.
class BestResponseProblem {
public:
    BestResponseProblem(const FiniteGameConfig& config, const LimitSolution& sol);

    struct Data;
    /// Backward solve of the N x N matrix Riccati equation (in the eigenbasis
    /// of A_N) plus the affine offset vector and constant terms.
    [[nodiscard]] class BestResponse solve(std::size_t agent) const;

private:
    std::shared_ptr<const Data> data_;
};

/// The optimal value is quadratic in the initial state,
/// V(x0) = 1/2 x0' P(0) x0 + g(0)' x0 + h(0), so one backward solve serves
/// every initial condition.
class BestResponse {
public:
    [[nodiscard]] std::size_t agent() const { return agent_; }
    [[nodiscard]] double cost(const Eigen::VectorXd& x0) const;
    /// Optimal control of the agent along the re-simulated optimal trajectory.
    [[nodiscard]] Trajectory control(const Eigen::VectorXd& x0) const;
    /// Population state along the optimal trajectory (original coordinates).
    [[nodiscard]] Trajectory states(const Eigen::VectorXd& x0) const;

private:
    friend class BestResponseProblem;
    BestResponse() = default;
    void simulate(const Eigen::VectorXd& x0, Trajectory* control, Trajectory* states) const;

    std::shared_ptr<const BestResponseProblem::Data> data_;
    std::size_t agent_ = 0;
    Eigen::VectorXd e_;     // V' e_i
    Trajectory feedback_;   // [P e; g] in the eigenbasis, per grid point
    Eigen::MatrixXd p0_;    // P(0) in the eigenbasis
    Eigen::VectorXd g0_;
    double h0_ = 0.0;
};

struct BestResponseResult {
    double cost = 0.0;
    Trajectory control;
};

BestResponseResult exact_best_response(const FiniteGameConfig& config, const LimitSolution& sol,
                                       std::size_t i);
BestResponseResult exact_best_response(const FiniteGameConfig& config, const LimitSolution& sol,
                                       std::size_t i, const Eigen::VectorXd& x0);

struct GapOptions {
    /// Agents to evaluate; empty means all.
    std::vector<std::size_t> agents;
    /// Monte Carlo replicas for Gaussian initial conditions.
    std::size_t replicas = 200;
};

struct GapReport {
    std::vector<std::size_t> agents;
    Eigen::VectorXd strategy_cost;
    Eigen::VectorXd best_response_cost;
    Eigen::VectorXd gap;
    Eigen::VectorXd gap_stderr;  ///< zero for deterministic init
    std::size_t replicas = 1;
    double mean_gap = 0.0;  ///< average over agents (and replicas)
    double mean_gap_stderr = 0.0;
    [[nodiscard]] double max_gap() const { return gap.size() ? gap.maxCoeff() : 0.0; }
};

/// Strategy cost minus exact best-response cost per agent. Gaussian initial
/// conditions average both over seeded replicas.
GapReport nash_gap(const FiniteGameConfig& config, const LimitSolution& sol,
                   const GapOptions& options = {});

struct CostStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stderr_;
    std::size_t replicas = 0;
};

CostStats monte_carlo_costs(const FiniteGameConfig& config, const LimitSolution& sol,
                            std::size_t replicas, std::uint64_t seed);

/// Per-agent tracking diagnostic: agent i tracks the cell-averaged limit
/// field zbar^i while the neighbour field (1/N) sum_j a_ij x^j of the
/// strategy run enters its dynamics as an exogenous input.
struct TrackingGap {
    double strategy_cost = 0.0;
    double optimal_cost = 0.0;
    [[nodiscard]] double gap() const { return strategy_cost - optimal_cost; }
};

TrackingGap tracking_gap(const FiniteGameConfig& config, const LimitSolution& sol,
                         const FiniteTrajectory& traj, std::size_t i);

}  // namespace lqgfg
