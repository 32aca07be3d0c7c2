#include "lqgfg/kernels.hpp"

#include "lqgfg/errors.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lqgfg::kernels {

void set_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) {
        omp_set_num_threads(jobs);
    }
#else
    (void)jobs;
#endif
}

int max_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

void check_product_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x) {
    if (a.cols() != x.rows()) {
        throw DimensionMismatch("matrix product of " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " with " + std::to_string(x.rows()) +
                                "x" + std::to_string(x.cols()));
    }
}

void check_discrepancy_dims(const Eigen::MatrixXd& limit_cells, const Eigen::MatrixXd& a) {
    if (limit_cells.cols() != a.cols() || a.rows() != a.cols() || a.rows() == 0 ||
        limit_cells.rows() % a.rows() != 0) {
        throw DimensionMismatch("discrepancy grid must be a multiple of the population size");
    }
}

}  // namespace

namespace serial {

Eigen::MatrixXd scaled_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, double scale) {
    check_product_dims(a, x);
    Eigen::MatrixXd out(a.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < a.cols(); ++j) {
                acc += a(i, j) * x(j, c);
            }
            out(i, c) = scale * acc;
        }
    }
    return out;
}

Eigen::VectorXd cell_discrepancy(const Eigen::MatrixXd& limit_cells, const Eigen::MatrixXd& a) {
    check_discrepancy_dims(limit_cells, a);
    const Eigen::Index grid = limit_cells.rows();
    const Eigen::Index n = a.rows();
    const Eigen::Index per_cell = grid / n;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < grid; ++k) {
            const double d = limit_cells(k, i) - a(k / per_cell, i);
            acc += d * d;
        }
        out(i) = std::sqrt(acc / static_cast<double>(grid));
    }
    return out;
}

double midpoint_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    if (f.size() != g.size() || f.size() == 0) {
        throw DimensionMismatch("midpoint_dot needs equal, nonempty grids");
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        acc += f(k) * g(k);
    }
    return acc / static_cast<double>(f.size());
}

}  // namespace serial

namespace parallel {

Eigen::MatrixXd scaled_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, double scale) {
    check_product_dims(a, x);
    Eigen::MatrixXd out(a.rows(), x.cols());
    const Eigen::Index cols = x.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) {
        out.col(c).noalias() = scale * (a * x.col(c));
    }
    return out;
}

Eigen::VectorXd cell_discrepancy(const Eigen::MatrixXd& limit_cells, const Eigen::MatrixXd& a) {
    check_discrepancy_dims(limit_cells, a);
    const Eigen::Index grid = limit_cells.rows();
    const Eigen::Index n = a.rows();
    const Eigen::Index per_cell = grid / n;
    Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index cell = 0; cell < n; ++cell) {
            const auto block =
                limit_cells.col(i).segment(cell * per_cell, per_cell).array() - a(cell, i);
            acc += block.square().sum();
        }
        out(i) = std::sqrt(acc / static_cast<double>(grid));
    }
    return out;
}

double midpoint_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    if (f.size() != g.size() || f.size() == 0) {
        throw DimensionMismatch("midpoint_dot needs equal, nonempty grids");
    }
    double acc = 0.0;
    const Eigen::Index n = f.size();
#pragma omp parallel for reduction(+ : acc) schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
        acc += f(k) * g(k);
    }
    return acc / static_cast<double>(n);
}

}  // namespace parallel

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::exception_ptr failure;
    std::mutex guard;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        {
            std::lock_guard lock(guard);
            if (failure) {
                continue;
            }
        }
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace lqgfg::kernels
