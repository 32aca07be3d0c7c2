// Times the serial reference kernels against their OpenMP versions.
//
//   bench_kernels [--repeat K] [--jobs J]

#include "lqgfg/kernels.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace lqgfg;

namespace {

double best_of(int repeat, const std::function<void()>& f) {
    double best = 1e300;
    for (int k = 0; k < repeat; ++k) {
        const auto start = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

void row(const std::string& name, double serial, double parallel) {
    std::printf("%-34s %12.3f %12.3f %8.2fx\n", name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP kernel timings"};
    int repeat = 5;
    int jobs = 0;
    app.add_option("--repeat", repeat, "timed repetitions (best is reported)");
    app.add_option("--jobs", jobs, "OpenMP worker count (0 keeps the default)");
    CLI11_PARSE(app, argc, argv);
    kernels::set_jobs(jobs);

    std::printf("workers: %d\n", kernels::max_jobs());
    std::printf("%-34s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");

    volatile double sink = 0.0;
    for (const int n : {90, 180, 360}) {
        const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
        const Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 4001);
        const double s = best_of(repeat, [&] { sink = sink + kernels::serial::scaled_product(a, x, 1.0 / n)(0, 0); });
        const double p = best_of(repeat, [&] { sink = sink + kernels::parallel::scaled_product(a, x, 1.0 / n)(0, 0); });
        row("field product N=" + std::to_string(n) + ", 4001 steps", s, p);
    }
    for (const int n : {90, 360}) {
        const int grid = 4096 / n * n;
        const Eigen::MatrixXd limit = Eigen::MatrixXd::Random(grid, n);
        const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
        const double s = best_of(repeat, [&] { sink = sink + kernels::serial::cell_discrepancy(limit, a)(0); });
        const double p = best_of(repeat, [&] { sink = sink + kernels::parallel::cell_discrepancy(limit, a)(0); });
        row("cell discrepancy N=" + std::to_string(n) + ", grid " + std::to_string(grid), s, p);
    }
    {
        const Eigen::VectorXd f = Eigen::VectorXd::Random(1 << 22);
        const Eigen::VectorXd g = Eigen::VectorXd::Random(1 << 22);
        const double s = best_of(repeat, [&] { sink = sink + kernels::serial::midpoint_dot(f, g); });
        const double p = best_of(repeat, [&] { sink = sink + kernels::parallel::midpoint_dot(f, g); });
        row("midpoint dot, 2^22 points", s, p);
    }
    return 0;
}
