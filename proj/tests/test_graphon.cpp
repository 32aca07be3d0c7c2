#include "lqgfg/errors.hpp"
#include "lqgfg/graphon.hpp"
#include "lqgfg/scenarios.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace lqgfg;
using std::numbers::pi;
using std::numbers::sqrt2;

TEST_CASE("step graphon validation") {
    CHECK(StepGraphon::from_matrix(Eigen::MatrixXd::Zero(1, 1), 1.0).n() == 1);
    CHECK(StepGraphon::from_matrix(multipartite_block_weights(), 1.0).n() == 3);
    CHECK_THROWS_AS(StepGraphon::from_matrix((Eigen::MatrixXd(2, 2) << 0, 1, 0.5, 0).finished(), 1.0),
                    NonSymmetric);
    CHECK_THROWS_AS(StepGraphon::from_matrix((Eigen::MatrixXd(2, 2) << 0, 2, 2, 0).finished(), 1.0),
                    BoundViolation);
    // Symmetry is reported before the bound.
    CHECK_THROWS_AS(StepGraphon::from_matrix((Eigen::MatrixXd(2, 2) << 0, 3, 2, 0).finished(), 1.0),
                    NonSymmetric);
}

TEST_CASE("partition cells are closed on the right") {
    CHECK(cell_index(0.0, 4) == 0);
    CHECK(cell_index(0.25, 4) == 0);
    CHECK(cell_index(0.2500001, 4) == 1);
    CHECK(cell_index(1.0, 4) == 3);
}

TEST_CASE("step operator action is (1/N) A v") {
    const StepGraphon zero = StepGraphon::from_matrix(Eigen::MatrixXd::Zero(3, 3), 1.0);
    CHECK(apply_step(zero, StepFunction(Eigen::Vector3d(1, 2, 3))).values().isZero());

    const StepGraphon ones = StepGraphon::from_matrix(Eigen::MatrixXd::Ones(2, 2), 1.0);
    const StepFunction out = apply_step(ones, StepFunction(Eigen::Vector2d(2, 4)));
    CHECK(out.values()(0) == doctest::Approx(3.0));
    CHECK(out.values()(1) == doctest::Approx(3.0));

    // Brute-force midpoint quadrature of int A(gamma, eta) v(eta) d eta on 3000 points.
    const Eigen::MatrixXd w = multipartite_block_weights();
    const StepFunction result = apply_step(StepGraphon::from_matrix(w, 1.0), StepFunction(Eigen::Vector3d::Ones()));
    for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int k = 0; k < 3000; ++k) {
            acc += w(i, k / 1000);
        }
        CHECK(result.values()(i) == doctest::Approx(acc / 3000.0).epsilon(1e-12));
    }
    CHECK(result.values()(0) == doctest::Approx(0.09));
}

TEST_CASE("step operator is self-adjoint") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(7, 7);
    a = 0.5 * (a + a.transpose()).eval();
    const StepGraphon w = StepGraphon::from_matrix(a, 1.0);
    const StepFunction u(Eigen::VectorXd::Random(7));
    const StepFunction v(Eigen::VectorXd::Random(7));
    CHECK(std::abs(inner_product(apply_step(w, u), v) - inner_product(u, apply_step(w, v))) < 1e-10);
}

TEST_CASE("spectrum of the all-ones kernel is one eigenvalue with a constant eigenfunction") {
    const FiniteRankGraphon g = spectrum(StepGraphon::from_matrix(Eigen::MatrixXd::Ones(5, 5), 1.0));
    REQUIRE(g.rank() == 1);
    CHECK(g.eigenvalue(0) == doctest::Approx(1.0));
    CHECK(g.eigenfunction(0)(0.3) == doctest::Approx(1.0));
    CHECK(spectrum(StepGraphon::from_matrix(Eigen::MatrixXd::Zero(4, 4), 1.0)).rank() == 0);
}

TEST_CASE("spectrum reconstructs the kernel and fixes eigenfunction signs") {
    Eigen::MatrixXd a = 0.5 * (Eigen::MatrixXd::Random(6, 6) + Eigen::MatrixXd::Ones(6, 6));
    a = 0.5 * (a + a.transpose()).eval();
    const StepGraphon w = StepGraphon::from_matrix(a, 1.0);
    const FiniteRankGraphon g = spectrum(w);
    for (std::size_t l = 0; l < g.rank(); ++l) {
        const Eigen::VectorXd& v = g.eigenfunction(l).step_values();
        Eigen::Index first = 0;
        while (std::abs(v(first)) <= 1e-10 * v.cwiseAbs().maxCoeff()) {
            ++first;
        }
        CHECK(v(first) > 0.0);
        if (l > 0) {
            CHECK(std::abs(g.eigenvalue(l)) <= std::abs(g.eigenvalue(l - 1)));
        }
    }
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            const double x = (i + 0.5) / 6.0;
            const double y = (j + 0.5) / 6.0;
            CHECK(g(x, y) == doctest::Approx(a(i, j)).epsilon(1e-10));
        }
    }
}

TEST_CASE("inner products") {
    auto one = [](double) { return 1.0; };
    auto s = [](double x) { return sqrt2 * std::sin(pi * x); };
    auto c = [](double x) { return sqrt2 * std::cos(pi * x); };
    CHECK(inner_product(one, one) == doctest::Approx(1.0));
    CHECK(inner_product(one, s) == doctest::Approx(2.0 * sqrt2 / pi).epsilon(1e-6));
    CHECK(std::abs(inner_product(s, c)) < 1e-10);

    const Eigenfunction step = Eigenfunction::step(Eigen::Vector2d(1.0, 3.0));
    const Eigenfunction sine = Eigenfunction::analytic(s, [](double x) { return -sqrt2 * std::cos(pi * x) / pi; });
    // int_0^{1/2} s = sqrt2/pi, int_{1/2}^1 s = sqrt2/pi.
    CHECK(inner_product(step, sine) == doctest::Approx(4.0 * sqrt2 / pi).epsilon(1e-14));
    CHECK(sine.cell_average(0, 2) == doctest::Approx(2.0 * sqrt2 / pi).epsilon(1e-14));
}

TEST_CASE("finite-rank graphon rejects zero eigenvalues and non-orthonormal functions") {
    const auto one = Eigenfunction::analytic([](double) { return 1.0; }, [](double x) { return x; });
    const auto two = Eigenfunction::analytic([](double) { return 2.0; }, [](double x) { return 2.0 * x; });
    CHECK_THROWS_AS(FiniteRankGraphon({0.0}, {one}), Error);
    CHECK_THROWS_AS(FiniteRankGraphon({1.0}, {two}), Error);
    CHECK_THROWS_AS(FiniteRankGraphon({1.0, 0.5}, {one}), DimensionMismatch);
}

TEST_CASE("E_N vanishes for matching kernels and has a closed form for the multipartite graph") {
    const Eigen::MatrixXd w = multipartite_block_weights();
    const StepGraphon blocks = StepGraphon::from_matrix(w, 1.0);
    CHECK(discrepancy_en(spectrum(blocks), blocks, 3000) < 1e-12);

    // The zeroed diagonal leaves a band of height w_kk and width 1/N: N * w_kk / N * sqrt(1/N).
    const MultipartiteScenario scenario = multipartite(30, w);
    CHECK(discrepancy_en(scenario.limit, scenario.graph, aligned_grid(90)) ==
          doctest::Approx(0.40 / std::sqrt(90.0)).epsilon(1e-9));
    CHECK_THROWS_AS((void)discrepancy_en(scenario.limit, scenario.graph, 100), DimensionMismatch);
}

TEST_CASE("E_N and operator-norm distance shrink for the sampled sinusoidal graph") {
    const FiniteRankGraphon limit = sinusoidal_limit();
    const StepGraphon g90 = sampled_graphon(90, sinusoidal_kernel);
    const StepGraphon g180 = sampled_graphon(180, sinusoidal_kernel);
    const StepGraphon g30 = sampled_graphon(30, sinusoidal_kernel);
    const double e90 = discrepancy_en(limit, g90, aligned_grid(90));
    const double e180 = discrepancy_en(limit, g180, aligned_grid(180));
    CHECK(e90 > 0.0);
    CHECK(e180 < e90);
    const double op30 = op_norm_distance(limit, g30, aligned_grid(30));
    const double op90 = op_norm_distance(limit, g90, aligned_grid(90));
    CHECK(op90 > 0.0);
    CHECK(op90 < op30);
}

TEST_CASE("operator-norm distance of identical kernels is zero") {
    const StepGraphon ones = StepGraphon::from_matrix(Eigen::MatrixXd::Ones(4, 4), 1.0);
    CHECK(op_norm_distance(spectrum(ones), ones, 400) < 1e-10);
    const auto one = Eigenfunction::analytic([](double) { return 1.0; }, [](double x) { return x; });
    CHECK(op_norm_distance(FiniteRankGraphon({1.0}, {one}), ones, 400) < 1e-10);
}

TEST_CASE("operator-norm reduction agrees with a dense eigensolve") {
    const FiniteRankGraphon limit = sinusoidal_limit();
    const StepGraphon g = sampled_graphon(8, sinusoidal_kernel);
    const int grid = 240;
    Eigen::MatrixXd dense(grid, grid);
    for (int k = 0; k < grid; ++k) {
        for (int m = 0; m < grid; ++m) {
            const double x = (k + 0.5) / grid;
            const double y = (m + 0.5) / grid;
            dense(k, m) = (sinusoidal_kernel(x, y) - g(x, y)) / grid;
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    const double reference = eig.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(op_norm_distance(limit, g, grid) == doctest::Approx(reference).epsilon(1e-8));
}

TEST_CASE("adjacency and spectral files round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "lqgfg_graphon_io";
    std::filesystem::create_directories(dir);
    const Eigen::MatrixXd w = multipartite(2, multipartite_block_weights()).graph.weights();
    write_adjacency((dir / "a.txt").string(), w);
    CHECK(read_adjacency((dir / "a.txt").string()) == w);

    const FiniteRankGraphon g = spectrum(StepGraphon::from_matrix(multipartite_block_weights(), 1.0));
    write_spectral((dir / "s.txt").string(), g, 3);
    const FiniteRankGraphon back = read_spectral((dir / "s.txt").string());
    REQUIRE(back.rank() == g.rank());
    for (std::size_t l = 0; l < g.rank(); ++l) {
        CHECK(back.eigenvalue(l) == g.eigenvalue(l));
        CHECK((back.eigenfunction(l).step_values() - g.eigenfunction(l).step_values()).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK_THROWS_AS((void)read_adjacency((dir / "missing.txt").string()), ConfigError);
}
