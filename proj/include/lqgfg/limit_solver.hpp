#pragma once

// Infinite-population LQ graphon field game on a finite-rank graphon.
//
// The equilibrium is computed by the Riccati cascade
//
//   -d/dt pi   = 2 alpha pi - (beta^2/r) pi^2 + 1,                      pi_T = 0
//   -d/dt Pi^l = [2(alpha - (beta^2/r) pi) + eta lambda_l] Pi^l
//                + (beta^2/r) lambda_l (Pi^l)^2 + (1 - eta pi),         Pi^l_T = 0
//    d/dt z^l  = [alpha + (beta^2/r)(Pi^l lambda_l - pi) + eta lambda_l] z^l
//    s^l       = Pi^l z^l
//
// SIGN CONVENTION: the eta*lambda_l*Pi term enters with a plus sign. That is
// what substituting s^l = Pi^l z^l into the coupled eigendirection system
//
//    d/dt z^l = (alpha - (beta^2/r) pi + eta lambda_l) z^l + (beta^2/r) lambda_l s^l
//    d/dt s^l = -(alpha - (beta^2/r) pi) s^l - (1 - eta pi) z^l,   s^l_T = 0
//
// produces. fbode_residual() evaluates that coupled system on the assembled
// solution and is the check that the cascade solves it.

#include "lqgfg/graphon.hpp"
#include "lqgfg/odeint.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace lqgfg {

struct GameParams {
    double alpha = -0.5;
    double beta = 1.0;
    double eta = 0.1;
    double r = 10.0;
    double horizon = 4.0;
    double dt = 1e-3;
    double blowup_threshold = 1e8;

    /// Throws ConfigError unless r > 0, horizon > 0, 0 < dt < horizon and
    /// horizon / dt is an integer.
    void validate() const;
    [[nodiscard]] TimeGrid grid() const { return {0.0, horizon, dt}; }
    /// beta^2 / r
    [[nodiscard]] double control_gain() const { return beta * beta / r; }
};

struct DeterministicInit {
    /// x_0 as a function on [0,1]; either step values or analytic.
    Eigenfunction x0;
};

struct GaussianInit {
    double mu = 10.0;
    double sigma2 = 1.0;
};

/// Initial data for the population: a deterministic profile or i.i.d.
/// Gaussian states whose limit profile is mu * 1.
class InitialCondition {
public:
    InitialCondition() : kind_(GaussianInit{}) {}
    static InitialCondition deterministic(const StepFunction& x0);
    static InitialCondition deterministic(RealFunction x0, RealFunction antiderivative = {});
    static InitialCondition gaussian(double mu, double sigma2);

    [[nodiscard]] bool is_gaussian() const { return std::holds_alternative<GaussianInit>(kind_); }
    [[nodiscard]] const GaussianInit& gaussian() const { return std::get<GaussianInit>(kind_); }
    [[nodiscard]] const DeterministicInit& deterministic() const {
        return std::get<DeterministicInit>(kind_);
    }
    /// Profile used by the limit problem: x_0 itself, or mu * 1.
    [[nodiscard]] double limit_profile(double gamma) const;
    /// lambda * <x_0, f> (deterministic) or lambda * mu * <1, f> (Gaussian).
    [[nodiscard]] double z0(double lambda, const Eigenfunction& f, int grid) const;

private:
    explicit InitialCondition(std::variant<DeterministicInit, GaussianInit> kind)
        : kind_(std::move(kind)) {}
    std::variant<DeterministicInit, GaussianInit> kind_;
};

struct LimitSolution {
    GameParams params;
    FiniteRankGraphon graphon;
    Trajectory pi;
    std::vector<Trajectory> capital_pi;
    std::vector<Trajectory> z;
    std::vector<Trajectory> s;
    /// The initial values z_0^l the cascade was started from.
    std::vector<double> z0;

    [[nodiscard]] const TimeGrid& grid() const { return pi.grid(); }
    [[nodiscard]] std::size_t rank() const { return z.size(); }
};

Trajectory solve_pi(const GameParams& params);

/// Throws FiniteEscape (carrying lambda and `ell`) if the solution blows up
/// before t = 0.
Trajectory solve_capital_pi(double lambda, const Trajectory& pi, const GameParams& params,
                            std::size_t ell = 0);

Trajectory solve_z_ell(double lambda, const Trajectory& capital_pi, const Trajectory& pi,
                       double z0, const GameParams& params);

LimitSolution solve_limit(const GameParams& params, const FiniteRankGraphon& graphon,
                          const InitialCondition& init);

/// Value of the double integral
///   int_0^T (beta^2/r) |lambda| / B(tau) int_tau^T |1 - eta pi_s| B(s) ds dtau,
/// B(t) = exp[int_0^t (alpha - (beta^2/r) pi + eta lambda) - int_t^T (alpha - (beta^2/r) pi)],
/// by composite trapezoid on the grid of `pi`. Below 1 the fixed point in
/// this eigendirection is unique.
double contraction_margin(double lambda, const Trajectory& pi, const GameParams& params);

/// Max over directions and interior grid points of the coupled-system
/// residuals (central differences), together with |s^l_T| and |z^l_0 - target|.
double fbode_residual(const LimitSolution& sol);

struct FieldValue {
    double z = 0.0;          ///< local graphon field z_t^gamma
    double s = 0.0;          ///< offset s_t^gamma
    double gain = 0.0;       ///< -(beta/r) pi_t
    double intercept = 0.0;  ///< (beta/r) s_t^gamma
};

FieldValue field_at(const LimitSolution& sol, double gamma, double t);

/// Simulates `agents` representative limit agents at gamma_k = (k - 1/2)/agents
/// under the equilibrium feedback and returns the sup over grid times and
/// agents of |(A x_t)(gamma_k) - z_t^{gamma_k}|, with A x_t evaluated by the
/// midpoint rule over the same agents.
double consistency_error(const LimitSolution& sol, const InitialCondition& init, std::size_t agents);

/// Largest |<z_t, g>| over grid times for a test function g, with z_t the
/// reconstructed field. Zero (to quadrature accuracy) for g orthogonal to
/// every eigenfunction.
double orthogonal_projection(const LimitSolution& sol, const RealFunction& g, int grid);

/// Writes pi.csv, Pi_ell.csv, z_ell.csv, s_ell.csv, spectrum.txt and
/// manifest.json into `dir` (created if needed).
void save_limit_solution(const LimitSolution& sol, const std::vector<double>& margins,
                         const std::string& dir);
LimitSolution load_limit_solution(const std::string& dir);

}  // namespace lqgfg
