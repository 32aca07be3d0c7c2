#pragma once

// Graphon representations on [0,1]^2.
//
// A StepGraphon is an N x N weight matrix read as a piecewise-constant kernel
// over the N-uniform partition P_1 = [0, 1/N], P_k = ((k-1)/N, k/N]. Its
// operator action on step functions over the same partition is exactly
// (1/N) A_N v, so it is never computed by quadrature. FiniteRankGraphon holds
// sum_l lambda_l f_l(x) f_l(y) with orthonormal f_l, the form every limit
// problem in this library requires.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace lqgfg {

inline constexpr int kDefaultQuadratureGrid = 4096;
inline constexpr double kDefaultRankTol = 1e-9;

using RealFunction = std::function<double(double)>;

/// Values on the N-uniform partition; represents sum_i 1_{P_i}(x) values_i.
class StepFunction {
public:
    StepFunction() = default;
    explicit StepFunction(Eigen::VectorXd values);

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double l2_norm() const;

private:
    Eigen::VectorXd values_;
};

/// Index i of the partition cell P_i containing x (0-based).
std::size_t cell_index(double x, std::size_t n);

class StepGraphon {
public:
    /// Validates symmetry (exact) and the entry bound; never symmetrises.
    static StepGraphon from_matrix(Eigen::MatrixXd weights, double bound);

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(weights_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& weights() const { return weights_; }
    [[nodiscard]] double bound() const { return bound_; }
    [[nodiscard]] double operator()(double x, double y) const;
    [[nodiscard]] bool zero_diagonal() const;

private:
    StepGraphon(Eigen::MatrixXd weights, double bound)
        : weights_(std::move(weights)), bound_(bound) {}

    Eigen::MatrixXd weights_;
    double bound_ = 1.0;
};

inline StepGraphon step_from_matrix(Eigen::MatrixXd weights, double bound) {
    return StepGraphon::from_matrix(std::move(weights), bound);
}

/// A real function on [0,1] known either analytically (optionally with an
/// antiderivative, which makes cell averages exact) or as step values on a
/// uniform partition.
class Eigenfunction {
public:
    static Eigenfunction analytic(RealFunction f, RealFunction antiderivative = {});
    static Eigenfunction step(Eigen::VectorXd values);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] bool is_step() const { return step_values_.size() > 0; }
    [[nodiscard]] const Eigen::VectorXd& step_values() const { return step_values_; }
    [[nodiscard]] bool has_antiderivative() const { return static_cast<bool>(antiderivative_); }

    /// Integral over [a, b]; exact for step functions and for analytic
    /// functions carrying an antiderivative, otherwise composite midpoint
    /// with resolution `grid` per unit length.
    [[nodiscard]] double integral(double a, double b, int grid = kDefaultQuadratureGrid) const;
    /// (1/mu(P_i)) * integral over P_i of the n-uniform partition.
    [[nodiscard]] double cell_average(std::size_t i, std::size_t n,
                                      int grid = kDefaultQuadratureGrid) const;
    /// Cell averages over every cell of the n-uniform partition.
    [[nodiscard]] Eigen::VectorXd cell_averages(std::size_t n, int grid = kDefaultQuadratureGrid) const;

private:
    RealFunction f_;
    RealFunction antiderivative_;
    Eigen::VectorXd step_values_;
};

/// sum_l lambda_l f_l(x) f_l(y) with nonzero lambda_l and orthonormal f_l.
class FiniteRankGraphon {
public:
    FiniteRankGraphon() = default;
    /// Throws Error when an eigenvalue is zero, the sizes differ, or
    /// |<f_k, f_l> - delta_kl| exceeds `orthonormality_tol`.
    FiniteRankGraphon(std::vector<double> eigenvalues, std::vector<Eigenfunction> eigenfunctions,
                      int quadrature_grid = kDefaultQuadratureGrid,
                      double orthonormality_tol = 1e-6);

    [[nodiscard]] std::size_t rank() const { return eigenvalues_.size(); }
    [[nodiscard]] const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    [[nodiscard]] const std::vector<Eigenfunction>& eigenfunctions() const { return eigenfunctions_; }
    [[nodiscard]] double eigenvalue(std::size_t l) const { return eigenvalues_.at(l); }
    [[nodiscard]] const Eigenfunction& eigenfunction(std::size_t l) const { return eigenfunctions_.at(l); }
    [[nodiscard]] int quadrature_grid() const { return quadrature_grid_; }

    [[nodiscard]] double operator()(double x, double y) const;
    /// d x n matrix of cell averages of each eigenfunction.
    [[nodiscard]] Eigen::MatrixXd cell_averages(std::size_t n) const;
    /// Values f_l(x_k) at the midpoints of a `grid`-point uniform grid (grid x d).
    [[nodiscard]] Eigen::MatrixXd midpoint_values(int grid) const;

private:
    std::vector<double> eigenvalues_;
    std::vector<Eigenfunction> eigenfunctions_;
    int quadrature_grid_ = kDefaultQuadratureGrid;
};

/// Exact operator action (1/N) A_N v of the step kernel on a step function.
StepFunction apply_step(const StepGraphon& w, const StepFunction& v);

/// Nonzero spectrum of the step kernel: eigenvalues nu_k / N of A_N with
/// |nu_k| / N > rank_tol, sorted by |.| descending (ties: larger signed value
/// first), eigenfunctions sqrt(N) v_k with the first nonzero entry positive.
FiniteRankGraphon spectrum(const StepGraphon& w, double rank_tol = kDefaultRankTol);

/// Composite midpoint approximation of int_0^1 f g.
double inner_product(const RealFunction& f, const RealFunction& g, int grid = kDefaultQuadratureGrid);
/// Exact when either side is a step function and the other is a step
/// function or has an antiderivative; composite midpoint otherwise.
double inner_product(const Eigenfunction& f, const Eigenfunction& g, int grid = kDefaultQuadratureGrid);
/// Exact pairing of two step functions on the same partition.
double inner_product(const StepFunction& f, const StepFunction& g);

/// max_i N * || int_{P_i} (A - A^N)(., eta) d eta ||_2, the gamma-norm taken
/// by midpoint quadrature on `grid` points. `grid` must be a multiple of n.
double discrepancy_en(const FiniteRankGraphon& limit, const StepGraphon& w,
                      int grid = kDefaultQuadratureGrid);

/// Largest |eigenvalue| of the grid discretisation of (A - A^N), scaled by
/// 1/grid. The discretised difference has rank at most d + N, so it is
/// reduced exactly onto that subspace before the dense eigensolve.
double op_norm_distance(const FiniteRankGraphon& limit, const StepGraphon& w,
                        int grid = kDefaultQuadratureGrid);

/// Smallest multiple of n that is at least `target`.
int aligned_grid(std::size_t n, int target = kDefaultQuadratureGrid);

/// Plain-text adjacency: first line N, then N whitespace-separated rows.
Eigen::MatrixXd read_adjacency(const std::string& path);
void write_adjacency(const std::string& path, const Eigen::MatrixXd& weights);

/// Spectral data file: first line G (grid size), then one line per
/// component "lambda v_1 ... v_G" with step values on the G-uniform partition.
FiniteRankGraphon read_spectral(const std::string& path);
void write_spectral(const std::string& path, const FiniteRankGraphon& graphon, int grid);

}  // namespace lqgfg
