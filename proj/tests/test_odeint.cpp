#include "lqgfg/errors.hpp"
#include "lqgfg/odeint.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lqgfg;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("time grid counts steps and rejects fractional step counts") {
    const TimeGrid grid(0.0, 4.0, 1e-3);
    CHECK(grid.steps() == 4000);
    CHECK(grid.size() == 4001);
    CHECK(grid.time(4000) == doctest::Approx(4.0));
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0.3), OutOfRange);
    CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 0.1), OutOfRange);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0.0), OutOfRange);
}

TEST_CASE("zero field keeps the initial value") {
    const Trajectory y = integrate([](double, const Eigen::VectorXd&) { return scalar(0.0); },
                                   scalar(5.0), 0.0, 1.0, 0.1);
    CHECK(y.size() == 11);
    for (std::size_t k = 0; k < y.size(); ++k) {
        CHECK(y.scalar(k) == 5.0);
    }
}

TEST_CASE("exponential growth reaches e within 1e-10") {
    const Trajectory y = integrate([](double, const Eigen::VectorXd& v) { return v; }, scalar(1.0),
                                   0.0, 1.0, 1e-3);
    CHECK(std::abs(y.back() - std::exp(1.0)) < 1e-10);
}

TEST_CASE("RK4 error falls sixteenfold when the step halves") {
    auto error = [](double h) {
        const Trajectory y = integrate(
            [](double t, const Eigen::VectorXd& v) { return Eigen::VectorXd(-v * std::cos(t)); },
            scalar(1.0), 0.0, 2.0, h);
        return std::abs(y.back() - std::exp(-std::sin(2.0)));
    };
    const double ratio = error(0.1) / error(0.05);
    CHECK(ratio > 14.0);
    CHECK(ratio < 18.0);
}

TEST_CASE("backward integration is stored in forward time order") {
    const Trajectory y = integrate([](double, const Eigen::VectorXd&) { return scalar(1.0); },
                                   scalar(0.0), 1.0, 0.0, 0.25);
    CHECK(y.grid().t0() == 0.0);
    CHECK(y.back() == doctest::Approx(0.0));
    CHECK(y.front() == doctest::Approx(-1.0));
    CHECK(y.scalar(2) == doctest::Approx(-0.5));
}

TEST_CASE("finite escape of y' = y^2 is reported near t = 1") {
    IntegrateOptions options;
    options.blowup_threshold = 1e6;
    try {
        (void)integrate([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v.cwiseProduct(v)); },
                        scalar(1.0), 0.0, 2.0, 1e-3, options);
        FAIL("expected BlowUp");
    } catch (const BlowUp& e) {
        CHECK(e.time == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("post-step hook runs after every step") {
    IntegrateOptions options;
    int calls = 0;
    options.post_step = [&calls](Eigen::VectorXd& y) {
        ++calls;
        y(0) = 0.0;
    };
    const Trajectory y = integrate([](double, const Eigen::VectorXd&) { return scalar(1.0); },
                                   scalar(0.0), 0.0, 1.0, 0.1, options);
    CHECK(calls == 10);
    CHECK(y.back() == 0.0);
}

TEST_CASE("linear sampling is exact on the grid and rejects outside times") {
    const Trajectory line(TimeGrid(0.0, 1.0, 1.0), (Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished());
    CHECK(sample_scalar(line, 0.5) == doctest::Approx(0.5));
    CHECK(sample_scalar(line, 1.0) == 1.0);
    CHECK_THROWS_AS((void)sample_scalar(line, 1.5), OutOfRange);
    CHECK_THROWS_AS((void)sample_scalar(line, -0.1), OutOfRange);

    const Trajectory exp_traj = integrate([](double, const Eigen::VectorXd& v) { return v; }, scalar(1.0),
                                          0.0, 1.0, 1e-3);
    CHECK(std::abs(sample_scalar(exp_traj, 0.3335) - std::exp(0.3335)) < 1e-6);
}

TEST_CASE("cubic sampling reproduces cubic polynomials") {
    const TimeGrid grid(0.0, 1.0, 0.1);
    Eigen::MatrixXd v(1, grid.size());
    auto p = [](double t) { return 2.0 * t * t * t - t * t + 0.5 * t - 3.0; };
    for (std::size_t k = 0; k < grid.size(); ++k) {
        v(0, static_cast<Eigen::Index>(k)) = p(grid.time(k));
    }
    const Trajectory traj(grid, v);
    for (double t : {0.0, 0.03, 0.45, 0.95, 1.0}) {
        CHECK(sample_cubic_scalar(traj, 0, t) == doctest::Approx(p(t)).epsilon(1e-12));
        CHECK(sample_cubic(traj, t)(0) == doctest::Approx(p(t)).epsilon(1e-12));
    }
}

TEST_CASE("CSV round trip is exact") {
    const Trajectory y = integrate(
        [](double t, const Eigen::VectorXd& v) { return Eigen::VectorXd(Eigen::Vector2d(v(1), -v(0) + t)); },
        Eigen::Vector2d(1.0, 0.0), 0.0, 1.0, 0.01);
    std::stringstream buffer;
    write_csv(buffer, y);
    CHECK(buffer.str().rfind("t,v1,v2\n", 0) == 0);
    const Trajectory back = read_csv(buffer);
    CHECK(back.grid() == y.grid());
    CHECK(back.values() == y.values());
}

TEST_CASE("trajectory rejects a sample count that does not match the grid") {
    CHECK_THROWS_AS(Trajectory(TimeGrid(0.0, 1.0, 0.5), Eigen::MatrixXd::Zero(1, 2)), DimensionMismatch);
}
