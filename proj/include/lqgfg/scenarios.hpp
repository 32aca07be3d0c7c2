#pragma once

// Generators for the multipartite and sinusoidal experiments and for seeded
// Gaussian initial states. All generators are pure functions of their inputs.

#include "lqgfg/graphon.hpp"

#include <cstdint>
#include <functional>

namespace lqgfg {

using Kernel = std::function<double(double, double)>;

struct MultipartiteScenario {
    StepGraphon graph;
    FiniteRankGraphon limit;
};

/// The 3 x 3 community weight matrix of the multipartite experiment.
Eigen::MatrixXd multipartite_block_weights();

/// k*n x k*n adjacency with block weights off the diagonal and a_ii = 0; the
/// limit is the spectrum of the k x k step kernel.
MultipartiteScenario multipartite(std::size_t per_community, const Eigen::MatrixXd& block_weights,
                                  double bound = 1.0);

enum class GridPoints {
    Midpoint,  ///< p_k = (k - 1/2) / N
    Endpoint,  ///< p_k = (k - 1) / (N - 1), both ends included
};

/// a_ij = kernel(p_i, p_j) for i != j, a_ii = 0.
StepGraphon sampled_graphon(std::size_t n, const Kernel& kernel, GridPoints points = GridPoints::Midpoint,
                            double bound = 1.0);

/// 0.5 cos(pi (x - y)) + 0.5
double sinusoidal_kernel(double x, double y);

/// Orthonormal spectral decomposition of sinusoidal_kernel on [0,1].
///
/// The kernel is 0.5 * 1(x)1(y) + 0.25 h(x)h(y) + 0.25 c(x)c(y) with
/// h = sqrt2 sin(pi .) and c = sqrt2 cos(pi .). On [0,1], c is orthogonal to
/// both 1 and h, but <1, h> = 2 sqrt2 / pi, so 1 and h are not eigenfunctions.
/// Diagonalising the operator on span{1, h} gives
///   lambda ~ 0.716974 (f = p + q h), 0.25 (f = c), lambda ~ 0.033026 (f = p' + q' h).
FiniteRankGraphon sinusoidal_limit();

/// Seed of replica k in a seeded family: seed XOR k.
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica);

/// n i.i.d. N(mu, sigma2) draws; deterministic in (n, seed).
Eigen::VectorXd gaussian_init(std::size_t n, double mu, double sigma2, std::uint64_t seed);

}  // namespace lqgfg
