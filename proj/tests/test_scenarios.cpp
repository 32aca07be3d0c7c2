#include "lqgfg/errors.hpp"
#include "lqgfg/scenarios.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lqgfg;

TEST_CASE("multipartite graph layout") {
    const Eigen::MatrixXd w = multipartite_block_weights();
    const MultipartiteScenario s = multipartite(30, w);
    CHECK(s.graph.n() == 90);
    CHECK(s.graph.zero_diagonal());
    CHECK(s.graph.weights()(0, 1) == 0.25);
    CHECK(s.graph.weights()(0, 89) == 0.02);
    CHECK(s.graph.weights()(45, 75) == 0.07);
    CHECK(s.graph.weights()(89, 88) == 0.40);
    CHECK(s.limit.rank() == 3);
    CHECK_THROWS_AS(multipartite(0, w), ConfigError);

    const MultipartiteScenario zero = multipartite(4, Eigen::MatrixXd::Zero(3, 3));
    CHECK(zero.graph.weights().isZero());
    CHECK(zero.limit.rank() == 0);
}

TEST_CASE("multipartite limit eigenvalues are the characteristic roots over 3") {
    const Eigen::MatrixXd w = multipartite_block_weights();
    const auto roots = oracle::symmetric_cubic_roots(w);
    const FiniteRankGraphon limit = multipartite(30, w).limit;
    std::vector<double> got = limit.eigenvalues();
    std::sort(got.begin(), got.end());
    for (int k = 0; k < 3; ++k) {
        CHECK(got[static_cast<std::size_t>(k)] == doctest::Approx(roots[static_cast<std::size_t>(k)] / 3.0).epsilon(1e-12));
    }
    CHECK(limit.eigenvalue(0) == doctest::Approx(0.13808778).epsilon(1e-7));
}

TEST_CASE("sampled graphon entries") {
    const StepGraphon ones = sampled_graphon(5, [](double, double) { return 1.0; });
    CHECK(ones.weights() == (Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5)));

    const StepGraphon prod = sampled_graphon(4, [](double x, double y) { return x * y; });
    CHECK(prod.weights()(0, 1) == doctest::Approx(0.125 * 0.375));
    CHECK(prod.weights()(2, 3) == doctest::Approx(0.625 * 0.875));
    CHECK(prod.weights()(3, 3) == 0.0);

    const StepGraphon ends = sampled_graphon(3, [](double x, double y) { return x + y; }, GridPoints::Endpoint, 2.0);
    CHECK(ends.weights()(0, 2) == doctest::Approx(1.0));
    CHECK(ends.weights()(1, 2) == doctest::Approx(1.5));
}

TEST_CASE("sinusoidal limit is an orthonormal decomposition of the kernel") {
    const FiniteRankGraphon g = sinusoidal_limit();
    REQUIRE(g.rank() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t l = 0; l < 3; ++l) {
            const auto& fk = g.eigenfunction(k);
            const auto& fl = g.eigenfunction(l);
            const double ip = oracle::simpson([&](double x) { return fk(x) * fl(x); }, 0.0, 1.0, 2000);
            CHECK(std::abs(ip - (k == l ? 1.0 : 0.0)) < 1e-10);
        }
    }
    for (double x : {0.0, 0.2, 0.7, 1.0}) {
        for (double y : {0.0, 0.45, 0.9}) {
            CHECK(g(x, y) == doctest::Approx(sinusoidal_kernel(x, y)).epsilon(1e-12));
        }
    }
    CHECK(g(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(g.eigenvalue(1) == doctest::Approx(0.25));
    CHECK(g.eigenvalue(0) + g.eigenvalue(2) == doctest::Approx(0.75));
    // Eigenvalues of the 2 x 2 Gram form on span{1, sqrt2 sin}.
    const double kappa = 2.0 * std::numbers::sqrt2 / std::numbers::pi;
    const double det = 0.5 * 0.25 * (1.0 - kappa * kappa);
    CHECK(g.eigenvalue(0) * g.eigenvalue(2) == doctest::Approx(det).epsilon(1e-12));
}

TEST_CASE("sampled sinusoidal spectrum converges to the limit spectrum") {
    const FiniteRankGraphon limit = sinusoidal_limit();
    auto error = [&](std::size_t n) {
        const FiniteRankGraphon g = spectrum(sampled_graphon(n, sinusoidal_kernel));
        double worst = 0.0;
        for (std::size_t l = 0; l < 3; ++l) {
            worst = std::max(worst, std::abs(g.eigenvalue(l) - limit.eigenvalue(l)));
        }
        return worst;
    };
    const double e90 = error(90);
    CHECK(e90 < 0.02);
    CHECK(error(180) < e90);
}

TEST_CASE("Gaussian initial states") {
    CHECK(gaussian_init(5, 3.0, 0.0, 7) == Eigen::VectorXd::Constant(5, 3.0));
    CHECK(gaussian_init(50, 10.0, 1.0, 42) == gaussian_init(50, 10.0, 1.0, 42));
    CHECK(gaussian_init(50, 10.0, 1.0, 42) != gaussian_init(50, 10.0, 1.0, 43));
    const Eigen::VectorXd big = gaussian_init(10000, 10.0, 1.0, 3);
    CHECK(std::abs(big.mean() - 10.0) < 4.0 / std::sqrt(10000.0));
    CHECK_THROWS_AS(gaussian_init(3, 0.0, -1.0, 0), ConfigError);
    CHECK(replica_seed(12, 5) == (12u ^ 5u));
}
