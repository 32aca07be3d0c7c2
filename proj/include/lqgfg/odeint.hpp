#pragma once

// Fixed-step classical RK4 on a uniform time grid.
//
// Every time-dependent quantity in the library (pi, Pi^l, z^l, s^l, agent
// states, best-response Riccati data) lives on one TimeGrid so that values
// line up index by index and no resampling enters the consistency checks.
// Backward integration (t1 < t0) runs the reversed field forward and stores
// the result in forward time order.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>

namespace lqgfg {

/// Uniform grid t0, t0 + dt, ..., t1 (t0 < t1).
class TimeGrid {
public:
    TimeGrid() = default;
    /// Throws OutOfRange unless (t1 - t0) / dt is a positive integer to
    /// within 1e-9 relative.
    TimeGrid(double t0, double t1, double dt);

    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] double t1() const { return t1_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] std::size_t size() const { return steps_ + 1; }
    [[nodiscard]] double time(std::size_t k) const {
        return k == steps_ ? t1_ : t0_ + static_cast<double>(k) * dt_;
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.steps_ == b.steps_ && a.t0_ == b.t0_ && a.t1_ == b.t1_;
    }

private:
    double t0_ = 0.0;
    double t1_ = 1.0;
    double dt_ = 1.0;
    std::size_t steps_ = 1;
};

/// Vector-valued samples on a TimeGrid; column k holds the state at time(k).
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(TimeGrid grid, Eigen::MatrixXd values);

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return grid_.size(); }
    [[nodiscard]] Eigen::Index dim() const { return values_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
    [[nodiscard]] auto at(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
    [[nodiscard]] double operator()(Eigen::Index component, std::size_t k) const {
        return values_(component, static_cast<Eigen::Index>(k));
    }
    /// Component 0 at grid index k, for scalar trajectories.
    [[nodiscard]] double scalar(std::size_t k) const { return values_(0, static_cast<Eigen::Index>(k)); }
    [[nodiscard]] double front() const { return scalar(0); }
    [[nodiscard]] double back() const { return scalar(grid_.steps()); }

private:
    TimeGrid grid_;
    Eigen::MatrixXd values_;
};

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

struct IntegrateOptions {
    double blowup_threshold = 1e8;
    /// Applied to the state after every completed step (e.g. symmetrisation).
    std::function<void(Eigen::VectorXd&)> post_step;
};

/// RK4 from y0 at t0 to t1 with fixed `step`; t1 < t0 integrates backward.
/// Throws BlowUp(t) as soon as a state norm exceeds the threshold or turns
/// non-finite.
Trajectory integrate(const VectorField& field, const Eigen::VectorXd& y0, double t0, double t1,
                     double step, const IntegrateOptions& options = {});

/// Same stepping as integrate(), but hands every grid state to `observer`
/// (grid index, time, state) in integration order instead of storing it.
/// Backward runs visit indices steps, steps-1, ..., 0.
using StateObserver = std::function<void(std::size_t k, double t, const Eigen::VectorXd& y)>;
void integrate_observed(const VectorField& field, const Eigen::VectorXd& y0, const TimeGrid& grid,
                        bool backward, const StateObserver& observer,
                        const IntegrateOptions& options = {});

/// Linear interpolation between neighbouring grid values; exact on the grid.
/// Throws OutOfRange outside [t0, t1].
Eigen::VectorXd sample(const Trajectory& traj, double t);
double sample_scalar(const Trajectory& traj, double t);

/// Cubic Lagrange interpolation on the four nearest grid nodes. Solvers use
/// it for RK4 half-step evaluations of coefficient trajectories so that the
/// cascade keeps fourth-order accuracy.
Eigen::VectorXd sample_cubic(const Trajectory& traj, double t);
double sample_cubic_scalar(const Trajectory& traj, Eigen::Index component, double t);

/// CSV with header "t,v1,...,vk" and 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& traj, const std::string& prefix = "v");
void write_csv(const std::string& path, const Trajectory& traj, const std::string& prefix = "v");
Trajectory read_csv(std::istream& in);
Trajectory read_csv(const std::string& path);

}  // namespace lqgfg
