#include "lqgfg/odeint.hpp"

#include "lqgfg/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lqgfg {

TimeGrid::TimeGrid(double t0, double t1, double dt) : t0_(t0), t1_(t1), dt_(dt) {
    if (!(dt > 0.0) || !(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
        throw OutOfRange("time grid needs t0 < t1 and dt > 0");
    }
    const double ratio = (t1 - t0) / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw OutOfRange("(t1 - t0) / dt = " + std::to_string(ratio) + " is not a positive integer");
    }
    steps_ = static_cast<std::size_t>(rounded);
}

Trajectory::Trajectory(TimeGrid grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
        throw DimensionMismatch("trajectory has " + std::to_string(values_.cols()) +
                                " samples for a grid of " + std::to_string(grid_.size()));
    }
}

namespace {

void check_state(const Eigen::VectorXd& y, double t, double threshold) {
    if (!y.allFinite() || y.norm() > threshold) {
        throw BlowUp(t);
    }
}

}  // namespace

void integrate_observed(const VectorField& field, const Eigen::VectorXd& y0, const TimeGrid& grid,
                        bool backward, const StateObserver& observer,
                        const IntegrateOptions& options) {
    const double h = backward ? -grid.dt() : grid.dt();
    const std::size_t n = grid.steps();
    Eigen::VectorXd y = y0;
    std::size_t k = backward ? n : 0;
    check_state(y, grid.time(k), options.blowup_threshold);
    observer(k, grid.time(k), y);
    for (std::size_t step = 0; step < n; ++step) {
        const double t = grid.time(k);
        const std::size_t next = backward ? k - 1 : k + 1;
        const double t_next = grid.time(next);
        const double t_half = 0.5 * (t + t_next);

        const Eigen::VectorXd k1 = field(t, y);
        const Eigen::VectorXd k2 = field(t_half, y + (0.5 * h) * k1);
        const Eigen::VectorXd k3 = field(t_half, y + (0.5 * h) * k2);
        const Eigen::VectorXd k4 = field(t_next, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (options.post_step) {
            options.post_step(y);
        }
        check_state(y, t_next, options.blowup_threshold);
        k = next;
        observer(k, t_next, y);
    }
}

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& y0, double t0, double t1,
                     double step, const IntegrateOptions& options) {
    if (!(step > 0.0)) {
        throw OutOfRange("integration step must be positive");
    }
    if (t0 == t1) {
        throw OutOfRange("integration interval is empty");
    }
    const bool backward = t1 < t0;
    const TimeGrid grid = backward ? TimeGrid(t1, t0, step) : TimeGrid(t0, t1, step);
    Eigen::MatrixXd values(y0.size(), static_cast<Eigen::Index>(grid.size()));
    integrate_observed(
        field, y0, grid, backward,
        [&values](std::size_t k, double, const Eigen::VectorXd& y) {
            values.col(static_cast<Eigen::Index>(k)) = y;
        },
        options);
    return {grid, std::move(values)};
}

namespace {

// Index of the grid interval containing t (clamped to the last interval).
std::size_t locate(const TimeGrid& grid, double t) {
    if (!(t >= grid.t0() - 1e-12 * std::max(1.0, std::abs(grid.t0()))) ||
        !(t <= grid.t1() + 1e-12 * std::max(1.0, std::abs(grid.t1())))) {
        throw OutOfRange("time " + std::to_string(t) + " outside [" + std::to_string(grid.t0()) +
                         ", " + std::to_string(grid.t1()) + "]");
    }
    const double pos = (t - grid.t0()) / grid.dt();
    const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    return std::min(k, grid.steps() - 1);
}

// Lagrange weights for nodes base..base+3 evaluated at t.
std::array<double, 4> cubic_weights(const TimeGrid& grid, std::size_t base, double t) {
    std::array<double, 4> nodes{};
    for (std::size_t j = 0; j < 4; ++j) {
        nodes[j] = grid.time(base + j);
    }
    std::array<double, 4> w{};
    for (std::size_t j = 0; j < 4; ++j) {
        double num = 1.0;
        double den = 1.0;
        for (std::size_t m = 0; m < 4; ++m) {
            if (m != j) {
                num *= t - nodes[m];
                den *= nodes[j] - nodes[m];
            }
        }
        w[j] = num / den;
    }
    return w;
}

}  // namespace

Eigen::VectorXd sample(const Trajectory& traj, double t) {
    const auto& grid = traj.grid();
    const std::size_t k = locate(grid, t);
    const double theta = std::clamp((t - grid.time(k)) / grid.dt(), 0.0, 1.0);
    if (theta == 0.0) {
        return traj.at(k);
    }
    if (theta == 1.0) {
        return traj.at(k + 1);
    }
    return (1.0 - theta) * traj.at(k) + theta * traj.at(k + 1);
}

double sample_scalar(const Trajectory& traj, double t) { return sample(traj, t)(0); }

Eigen::VectorXd sample_cubic(const Trajectory& traj, double t) {
    const auto& grid = traj.grid();
    if (grid.steps() < 3) {
        return sample(traj, t);
    }
    const std::size_t k = locate(grid, t);
    const std::size_t base = std::min(k > 0 ? k - 1 : 0, grid.steps() - 3);
    const auto w = cubic_weights(grid, base, t);
    Eigen::VectorXd out = w[0] * traj.at(base);
    for (std::size_t j = 1; j < 4; ++j) {
        out += w[j] * traj.at(base + j);
    }
    return out;
}

double sample_cubic_scalar(const Trajectory& traj, Eigen::Index component, double t) {
    const auto& grid = traj.grid();
    if (grid.steps() < 3) {
        return sample(traj, t)(component);
    }
    const std::size_t k = locate(grid, t);
    const std::size_t base = std::min(k > 0 ? k - 1 : 0, grid.steps() - 3);
    const auto w = cubic_weights(grid, base, t);
    double out = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        out += w[j] * traj(component, base + j);
    }
    return out;
}

namespace {

void put_double(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_csv(std::ostream& out, const Trajectory& traj, const std::string& prefix) {
    out << 't';
    for (Eigen::Index c = 0; c < traj.dim(); ++c) {
        out << ',' << prefix << (c + 1);
    }
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put_double(out, traj.grid().time(k));
        for (Eigen::Index c = 0; c < traj.dim(); ++c) {
            out << ',';
            put_double(out, traj(c, k));
        }
        out << '\n';
    }
}

void write_csv(const std::string& path, const Trajectory& traj, const std::string& prefix) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    write_csv(out, traj, prefix);
}

Trajectory read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("empty trajectory CSV");
    }
    const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
    std::vector<double> times;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        Eigen::Index read = 0;
        while (std::getline(row, cell, ',')) {
            const double v = std::strtod(cell.c_str(), nullptr);
            if (read == 0) {
                times.push_back(v);
            } else {
                flat.push_back(v);
            }
            ++read;
        }
        if (read != columns + 1) {
            throw Error("trajectory CSV row has " + std::to_string(read) + " cells, expected " +
                        std::to_string(columns + 1));
        }
    }
    if (times.size() < 2) {
        throw Error("trajectory CSV needs at least two rows");
    }
    const std::size_t steps = times.size() - 1;
    const TimeGrid grid(times.front(), times.back(),
                        (times.back() - times.front()) / static_cast<double>(steps));
    Eigen::MatrixXd values(columns, static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (Eigen::Index c = 0; c < columns; ++c) {
            values(c, static_cast<Eigen::Index>(k)) =
                flat[k * static_cast<std::size_t>(columns) + static_cast<std::size_t>(c)];
        }
    }
    return {grid, std::move(values)};
}

Trajectory read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return read_csv(in);
}

}  // namespace lqgfg
