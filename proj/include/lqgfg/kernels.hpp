#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference in
// kernels::serial and an OpenMP version in kernels::parallel; tests check
// that the two agree and bench/bench_kernels times them against each other.

#include <Eigen/Dense>

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>

namespace lqgfg::kernels {

/// Sets the OpenMP worker count (no-op without OpenMP). jobs <= 0 keeps the default.
void set_jobs(int jobs);
int max_jobs();

namespace serial {

/// out = scale * a * x, column by column with explicit loops.
Eigen::MatrixXd scaled_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, double scale);

/// For each cell i: sqrt(mean_k (limit_cells(k, i) - a(cell(k), i))^2) where
/// grid point k lies in cell k * n / grid. limit_cells is grid x n.
Eigen::VectorXd cell_discrepancy(const Eigen::MatrixXd& limit_cells, const Eigen::MatrixXd& a);

/// Composite midpoint sum (1/G) sum_k f(x_k) g(x_k).
double midpoint_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

}  // namespace serial

namespace parallel {

Eigen::MatrixXd scaled_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, double scale);
Eigen::VectorXd cell_discrepancy(const Eigen::MatrixXd& limit_cells, const Eigen::MatrixXd& a);
double midpoint_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

}  // namespace parallel

/// Runs body(i) for i in [0, n) on the OpenMP pool. The first exception
/// thrown by any iteration is rethrown on the calling thread after the loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lqgfg::kernels
