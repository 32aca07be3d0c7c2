#include "lqgfg/scenarios.hpp"

#include "lqgfg/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace lqgfg {

Eigen::MatrixXd multipartite_block_weights() {
    Eigen::MatrixXd w(3, 3);
    w << 0.25, 0.0, 0.02,
         0.0, 0.0, 0.07,
         0.02, 0.07, 0.40;
    return w;
}

MultipartiteScenario multipartite(std::size_t per_community, const Eigen::MatrixXd& block_weights,
                                  double bound) {
    if (per_community < 1) {
        throw ConfigError("each community needs at least one node");
    }
    if (block_weights.rows() != block_weights.cols() || block_weights.rows() == 0) {
        throw ConfigError("block weight matrix must be square and nonempty");
    }
    // Validates symmetry and bound of the block matrix itself.
    const StepGraphon blocks = StepGraphon::from_matrix(block_weights, bound);

    const auto k = block_weights.rows();
    const auto per = static_cast<Eigen::Index>(per_community);
    const Eigen::Index n = k * per;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = i == j ? 0.0 : block_weights(i / per, j / per);
        }
    }
    return {StepGraphon::from_matrix(std::move(a), bound), spectrum(blocks)};
}

StepGraphon sampled_graphon(std::size_t n, const Kernel& kernel, GridPoints points, double bound) {
    if (n < 1) {
        throw ConfigError("sampled graph needs n >= 1");
    }
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::VectorXd p(size);
    for (Eigen::Index k = 0; k < size; ++k) {
        if (points == GridPoints::Midpoint) {
            p(k) = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        } else {
            p(k) = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        }
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = i + 1; j < size; ++j) {
            a(i, j) = kernel(p(i), p(j));
            a(j, i) = a(i, j);
        }
    }
    return StepGraphon::from_matrix(std::move(a), bound);
}

double sinusoidal_kernel(double x, double y) {
    return 0.5 * std::cos(std::numbers::pi * (x - y)) + 0.5;
}

FiniteRankGraphon sinusoidal_limit() {
    using std::numbers::pi;
    using std::numbers::sqrt2;
    // Orthonormal basis of span{1, h}: e1 = 1, e2 = (h - kappa) / rho.
    const double kappa = 2.0 * sqrt2 / pi;
    const double rho = std::sqrt(1.0 - kappa * kappa);
    Eigen::Matrix2d restricted;
    restricted << 0.5 + 0.25 * kappa * kappa, 0.25 * kappa * rho,
                  0.25 * kappa * rho, 0.25 * rho * rho;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(restricted);

    // Coefficients (p, q) of f = p + q sqrt2 sin(pi x), sign fixed by p > 0.
    auto mixed = [&](Eigen::Index k) {
        const Eigen::Vector2d c = solver.eigenvectors().col(k);
        double p = c(0) - c(1) * kappa / rho;
        double q = c(1) / rho;
        if (p < 0.0) {
            p = -p;
            q = -q;
        }
        return Eigenfunction::analytic(
            [p, q](double x) { return p + q * sqrt2 * std::sin(pi * x); },
            [p, q](double x) { return p * x - q * sqrt2 * std::cos(pi * x) / pi; });
    };
    const Eigenfunction cosine = Eigenfunction::analytic(
        [](double x) { return sqrt2 * std::cos(pi * x); },
        [](double x) { return sqrt2 * std::sin(pi * x) / pi; });

    // Eigen sorts ascending: index 1 is the large eigenvalue.
    return FiniteRankGraphon({solver.eigenvalues()(1), 0.25, solver.eigenvalues()(0)},
                             {mixed(1), cosine, mixed(0)});
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) { return seed ^ replica; }

Eigen::VectorXd gaussian_init(std::size_t n, double mu, double sigma2, std::uint64_t seed) {
    if (!(sigma2 >= 0.0)) {
        throw ConfigError("Gaussian variance must be nonnegative");
    }
    const auto size = static_cast<Eigen::Index>(n);
    if (sigma2 == 0.0) {
        return Eigen::VectorXd::Constant(size, mu);
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> normal(mu, std::sqrt(sigma2));
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        out(i) = normal(engine);
    }
    return out;
}

}  // namespace lqgfg
