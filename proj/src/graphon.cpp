#include "lqgfg/graphon.hpp"

#include "lqgfg/errors.hpp"
#include "lqgfg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lqgfg {

StepFunction::StepFunction(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw DimensionMismatch("step function needs at least one cell");
    }
}

std::size_t cell_index(double x, std::size_t n) {
    // P_1 = [0, 1/N], P_k = ((k-1)/N, k/N]
    const double pos = std::ceil(x * static_cast<double>(n)) - 1.0;
    if (pos <= 0.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(pos), n - 1);
}

double StepFunction::operator()(double x) const { return values_(static_cast<Eigen::Index>(cell_index(x, n()))); }

double StepFunction::l2_norm() const { return values_.norm() / std::sqrt(static_cast<double>(n())); }

StepGraphon StepGraphon::from_matrix(Eigen::MatrixXd weights, double bound) {
    if (weights.rows() != weights.cols()) {
        throw DimensionMismatch("weight matrix must be square");
    }
    if (weights.rows() == 0) {
        throw DimensionMismatch("weight matrix must have n >= 1");
    }
    const auto n = weights.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (weights(i, j) != weights(j, i)) {
                throw NonSymmetric(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(std::abs(weights(i, j)) <= bound)) {
                throw BoundViolation(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                     weights(i, j), bound);
            }
        }
    }
    return {std::move(weights), bound};
}

double StepGraphon::operator()(double x, double y) const {
    return weights_(static_cast<Eigen::Index>(cell_index(x, n())),
                    static_cast<Eigen::Index>(cell_index(y, n())));
}

bool StepGraphon::zero_diagonal() const { return (weights_.diagonal().array() == 0.0).all(); }

// ---------------------------------------------------------------------------

Eigenfunction Eigenfunction::analytic(RealFunction f, RealFunction antiderivative) {
    Eigenfunction out;
    out.f_ = std::move(f);
    out.antiderivative_ = std::move(antiderivative);
    return out;
}

Eigenfunction Eigenfunction::step(Eigen::VectorXd values) {
    if (values.size() == 0) {
        throw DimensionMismatch("step eigenfunction needs at least one cell");
    }
    Eigenfunction out;
    out.step_values_ = std::move(values);
    return out;
}

double Eigenfunction::operator()(double x) const {
    if (is_step()) {
        return step_values_(static_cast<Eigen::Index>(
            cell_index(x, static_cast<std::size_t>(step_values_.size()))));
    }
    return f_(x);
}

double Eigenfunction::integral(double a, double b, int grid) const {
    if (b <= a) {
        return 0.0;
    }
    if (is_step()) {
        const auto n = static_cast<std::size_t>(step_values_.size());
        const double width = 1.0 / static_cast<double>(n);
        const std::size_t first = cell_index(std::nextafter(a, 2.0), n);
        const std::size_t last = cell_index(b, n);
        double acc = 0.0;
        for (std::size_t i = first; i <= last; ++i) {
            const double lo = std::max(a, static_cast<double>(i) * width);
            const double hi = std::min(b, static_cast<double>(i + 1) * width);
            if (hi > lo) {
                acc += step_values_(static_cast<Eigen::Index>(i)) * (hi - lo);
            }
        }
        return acc;
    }
    if (antiderivative_) {
        return antiderivative_(b) - antiderivative_(a);
    }
    const auto m = std::max<long>(1, std::lround(std::ceil((b - a) * grid)));
    const double h = (b - a) / static_cast<double>(m);
    double acc = 0.0;
    for (long k = 0; k < m; ++k) {
        acc += f_(a + (static_cast<double>(k) + 0.5) * h);
    }
    return acc * h;
}

double Eigenfunction::cell_average(std::size_t i, std::size_t n, int grid) const {
    const double width = 1.0 / static_cast<double>(n);
    return integral(static_cast<double>(i) * width, static_cast<double>(i + 1) * width, grid) /
           width;
}

Eigen::VectorXd Eigenfunction::cell_averages(std::size_t n, int grid) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        out(static_cast<Eigen::Index>(i)) = cell_average(i, n, grid);
    }
    return out;
}

// ---------------------------------------------------------------------------

FiniteRankGraphon::FiniteRankGraphon(std::vector<double> eigenvalues,
                                     std::vector<Eigenfunction> eigenfunctions,
                                     int quadrature_grid, double orthonormality_tol)
    : eigenvalues_(std::move(eigenvalues)),
      eigenfunctions_(std::move(eigenfunctions)),
      quadrature_grid_(quadrature_grid) {
    if (eigenvalues_.size() != eigenfunctions_.size()) {
        throw DimensionMismatch("eigenvalue and eigenfunction counts differ");
    }
    if (quadrature_grid_ < 1) {
        throw OutOfRange("quadrature grid must be positive");
    }
    for (double lambda : eigenvalues_) {
        if (lambda == 0.0 || !std::isfinite(lambda)) {
            throw Error("finite-rank graphon eigenvalues must be finite and nonzero");
        }
    }
    for (std::size_t k = 0; k < rank(); ++k) {
        for (std::size_t l = k; l < rank(); ++l) {
            const double ip = inner_product(eigenfunctions_[k], eigenfunctions_[l], quadrature_grid_);
            const double target = k == l ? 1.0 : 0.0;
            if (std::abs(ip - target) > orthonormality_tol) {
                throw Error("eigenfunctions " + std::to_string(k + 1) + " and " +
                            std::to_string(l + 1) + " are not orthonormal: <f_k, f_l> = " +
                            std::to_string(ip));
            }
        }
    }
}

double FiniteRankGraphon::operator()(double x, double y) const {
    double acc = 0.0;
    for (std::size_t l = 0; l < rank(); ++l) {
        acc += eigenvalues_[l] * eigenfunctions_[l](x) * eigenfunctions_[l](y);
    }
    return acc;
}

Eigen::MatrixXd FiniteRankGraphon::cell_averages(std::size_t n) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rank()), static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < rank(); ++l) {
        out.row(static_cast<Eigen::Index>(l)) =
            eigenfunctions_[l].cell_averages(n, quadrature_grid_).transpose();
    }
    return out;
}

Eigen::MatrixXd FiniteRankGraphon::midpoint_values(int grid) const {
    Eigen::MatrixXd out(grid, static_cast<Eigen::Index>(rank()));
    for (int k = 0; k < grid; ++k) {
        const double x = (k + 0.5) / grid;
        for (std::size_t l = 0; l < rank(); ++l) {
            out(k, static_cast<Eigen::Index>(l)) = eigenfunctions_[l](x);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

StepFunction apply_step(const StepGraphon& w, const StepFunction& v) {
    if (v.n() != w.n()) {
        throw DimensionMismatch("step function has " + std::to_string(v.n()) +
                                " cells, graphon has " + std::to_string(w.n()));
    }
    return StepFunction(w.weights() * v.values() / static_cast<double>(w.n()));
}

FiniteRankGraphon spectrum(const StepGraphon& w, double rank_tol) {
    const auto n = static_cast<double>(w.n());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.weights());
    if (solver.info() != Eigen::Success) {
        throw Error("eigendecomposition of the weight matrix failed");
    }
    const Eigen::VectorXd& nu = solver.eigenvalues();
    const Eigen::MatrixXd& vecs = solver.eigenvectors();

    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < nu.size(); ++k) {
        if (std::abs(nu(k)) / n > rank_tol) {
            kept.push_back(k);
        }
    }
    const double scale = std::max(1.0, nu.cwiseAbs().maxCoeff());
    const double tie_tol = 1e-12 * scale;
    std::stable_sort(kept.begin(), kept.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double da = std::abs(nu(a));
        const double db = std::abs(nu(b));
        if (std::abs(da - db) > tie_tol) {
            return da > db;
        }
        return nu(a) > nu(b);
    });

    std::vector<double> eigenvalues;
    std::vector<Eigenfunction> eigenfunctions;
    for (Eigen::Index k : kept) {
        Eigen::VectorXd v = vecs.col(k);
        const double vmax = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-10 * vmax) {
                if (v(i) < 0.0) {
                    v = -v;
                }
                break;
            }
        }
        eigenvalues.push_back(nu(k) / n);
        eigenfunctions.push_back(Eigenfunction::step(std::sqrt(n) * v));
    }
    return {std::move(eigenvalues), std::move(eigenfunctions), aligned_grid(w.n())};
}

double inner_product(const RealFunction& f, const RealFunction& g, int grid) {
    if (grid < 1) {
        throw OutOfRange("quadrature grid must be positive");
    }
    double acc = 0.0;
    for (int k = 0; k < grid; ++k) {
        const double x = (k + 0.5) / grid;
        acc += f(x) * g(x);
    }
    return acc / grid;
}

namespace {

// Exact int_0^1 s(x) g(x) dx for a step function s and a g that integrates
// exactly over intervals.
double step_pairing(const Eigenfunction& s, const Eigenfunction& g, int grid) {
    const Eigen::VectorXd& v = s.step_values();
    const auto n = static_cast<std::size_t>(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        acc += v(static_cast<Eigen::Index>(i)) * g.integral(lo, hi, grid);
    }
    return acc;
}

}  // namespace

double inner_product(const Eigenfunction& f, const Eigenfunction& g, int grid) {
    if (f.is_step() && g.is_step() && f.step_values().size() == g.step_values().size()) {
        return f.step_values().dot(g.step_values()) / static_cast<double>(f.step_values().size());
    }
    if (f.is_step() && (g.is_step() || g.has_antiderivative())) {
        return step_pairing(f, g, grid);
    }
    if (g.is_step() && f.has_antiderivative()) {
        return step_pairing(g, f, grid);
    }
    return inner_product([&f](double x) { return f(x); }, [&g](double x) { return g(x); }, grid);
}

double inner_product(const StepFunction& f, const StepFunction& g) {
    if (f.n() != g.n()) {
        throw DimensionMismatch("step functions live on different partitions");
    }
    return f.values().dot(g.values()) / static_cast<double>(f.n());
}

int aligned_grid(std::size_t n, int target) {
    const auto cells = static_cast<int>(n);
    return cells * std::max(1, (target + cells - 1) / cells);
}

double discrepancy_en(const FiniteRankGraphon& limit, const StepGraphon& w, int grid) {
    const std::size_t n = w.n();
    if (grid < 1 || static_cast<std::size_t>(grid) % n != 0) {
        throw DimensionMismatch("quadrature grid " + std::to_string(grid) +
                                " is not a multiple of N = " + std::to_string(n));
    }
    // limit_cells(k, i) = N * int_{P_i} A(gamma_k, eta) d eta
    //                   = sum_l lambda_l f_l(gamma_k) avg_{P_i} f_l
    const Eigen::MatrixXd values = limit.midpoint_values(grid);
    const Eigen::MatrixXd averages = limit.cell_averages(n);
    Eigen::VectorXd lambdas(static_cast<Eigen::Index>(limit.rank()));
    for (std::size_t l = 0; l < limit.rank(); ++l) {
        lambdas(static_cast<Eigen::Index>(l)) = limit.eigenvalue(l);
    }
    const Eigen::MatrixXd limit_cells = values * lambdas.asDiagonal() * averages;
    return kernels::parallel::cell_discrepancy(limit_cells, w.weights()).maxCoeff();
}

double op_norm_distance(const FiniteRankGraphon& limit, const StepGraphon& w, int grid) {
    if (grid < 1) {
        throw OutOfRange("quadrature grid must be positive");
    }
    const std::size_t n = w.n();
    const auto d = static_cast<Eigen::Index>(limit.rank());
    const auto cells = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(grid, d + cells);
    basis.leftCols(d) = limit.midpoint_values(grid);
    std::vector<Eigen::Index> cell_of(static_cast<std::size_t>(grid));
    for (int k = 0; k < grid; ++k) {
        cell_of[static_cast<std::size_t>(k)] =
            static_cast<Eigen::Index>(cell_index((k + 0.5) / grid, n));
        basis(k, d + cell_of[static_cast<std::size_t>(k)]) = 1.0;
    }
    const Eigen::MatrixXd f_values = basis.leftCols(d);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    qr.setThreshold(1e-12);
    const Eigen::Index r = qr.rank();
    if (r == 0) {
        return 0.0;
    }
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(grid, r);

    // M q for the grid operator (M v)_k = (1/G) sum_j (A - A^N)(x_k, x_j) v_j.
    Eigen::VectorXd lambdas(d);
    for (Eigen::Index l = 0; l < d; ++l) {
        lambdas(l) = limit.eigenvalue(static_cast<std::size_t>(l));
    }
    const Eigen::MatrixXd limit_part = f_values * (lambdas.asDiagonal() * (f_values.transpose() * q));
    Eigen::MatrixXd cell_sums = Eigen::MatrixXd::Zero(cells, r);
    for (int k = 0; k < grid; ++k) {
        cell_sums.row(cell_of[static_cast<std::size_t>(k)]) += q.row(k);
    }
    const Eigen::MatrixXd step_cells = w.weights() * cell_sums;
    Eigen::MatrixXd mq = limit_part;
    for (int k = 0; k < grid; ++k) {
        mq.row(k) -= step_cells.row(cell_of[static_cast<std::size_t>(k)]);
    }
    mq /= static_cast<double>(grid);

    Eigen::MatrixXd reduced = q.transpose() * mq;
    reduced = 0.5 * (reduced + reduced.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd read_adjacency(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open adjacency file " + path);
    }
    long n = 0;
    if (!(in >> n) || n < 1) {
        throw ConfigError("adjacency file " + path + " must start with N >= 1");
    }
    Eigen::MatrixXd a(n, n);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            if (!(in >> a(i, j))) {
                throw ConfigError("adjacency file " + path + " has fewer than N*N entries");
            }
        }
    }
    return a;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_adjacency(const std::string& path, const Eigen::MatrixXd& weights) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out << weights.rows() << '\n';
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < weights.cols(); ++j) {
            out << (j ? " " : "") << format_double(weights(i, j));
        }
        out << '\n';
    }
}

FiniteRankGraphon read_spectral(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open spectral file " + path);
    }
    long grid = 0;
    if (!(in >> grid) || grid < 1) {
        throw ConfigError("spectral file " + path + " must start with the grid size G >= 1");
    }
    std::vector<double> eigenvalues;
    std::vector<Eigenfunction> eigenfunctions;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream row(line);
        double lambda = 0.0;
        if (!(row >> lambda)) {
            continue;
        }
        Eigen::VectorXd values(grid);
        for (long k = 0; k < grid; ++k) {
            if (!(row >> values(k))) {
                throw ConfigError("spectral file " + path + ": component " +
                                  std::to_string(eigenvalues.size() + 1) + " has fewer than G values");
            }
        }
        eigenvalues.push_back(lambda);
        eigenfunctions.push_back(Eigenfunction::step(std::move(values)));
    }
    return {std::move(eigenvalues), std::move(eigenfunctions), aligned_grid(static_cast<std::size_t>(grid))};
}

void write_spectral(const std::string& path, const FiniteRankGraphon& graphon, int grid) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out << grid << '\n';
    for (std::size_t l = 0; l < graphon.rank(); ++l) {
        out << format_double(graphon.eigenvalue(l));
        const Eigen::VectorXd cells =
            graphon.eigenfunction(l).cell_averages(static_cast<std::size_t>(grid));
        for (Eigen::Index k = 0; k < cells.size(); ++k) {
            out << ' ' << format_double(cells(k));
        }
        out << '\n';
    }
}

}  // namespace lqgfg
