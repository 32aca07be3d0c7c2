#include "lqgfg/limit_solver.hpp"

#include "lqgfg/errors.hpp"
#include "lqgfg/kernels.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace lqgfg {

void GameParams::validate() const {
    if (!(r > 0.0)) {
        throw ConfigError("control weight r must be positive");
    }
    if (!(horizon > 0.0)) {
        throw ConfigError("horizon T must be positive");
    }
    if (!(dt > 0.0) || !(dt < horizon)) {
        throw ConfigError("integration step dt must satisfy 0 < dt < T");
    }
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(eta)) {
        throw ConfigError("alpha, beta and eta must be finite");
    }
    try {
        (void)grid();
    } catch (const OutOfRange& e) {
        throw ConfigError(std::string("T / dt must be an integer: ") + e.what());
    }
}

InitialCondition InitialCondition::deterministic(const StepFunction& x0) {
    return InitialCondition(DeterministicInit{Eigenfunction::step(x0.values())});
}

InitialCondition InitialCondition::deterministic(RealFunction x0, RealFunction antiderivative) {
    return InitialCondition(
        DeterministicInit{Eigenfunction::analytic(std::move(x0), std::move(antiderivative))});
}

InitialCondition InitialCondition::gaussian(double mu, double sigma2) {
    if (!(sigma2 >= 0.0)) {
        throw ConfigError("Gaussian initial variance must be nonnegative");
    }
    return InitialCondition(GaussianInit{mu, sigma2});
}

double InitialCondition::limit_profile(double gamma) const {
    if (is_gaussian()) {
        return gaussian().mu;
    }
    return deterministic().x0(gamma);
}

double InitialCondition::z0(double lambda, const Eigenfunction& f, int grid) const {
    if (is_gaussian()) {
        return lambda * gaussian().mu * f.integral(0.0, 1.0, grid);
    }
    return lambda * inner_product(deterministic().x0, f, grid);
}

// ---------------------------------------------------------------------------

Trajectory solve_pi(const GameParams& params) {
    params.validate();
    const double a = params.alpha;
    const double b = params.control_gain();
    const VectorField field = [a, b](double, const Eigen::VectorXd& y) {
        const double p = y(0);
        return Eigen::VectorXd::Constant(1, -(2.0 * a * p - b * p * p + 1.0));
    };
    IntegrateOptions options;
    options.blowup_threshold = params.blowup_threshold;
    return integrate(field, Eigen::VectorXd::Zero(1), params.horizon, 0.0, params.dt, options);
}

namespace {

void require_grid(const Trajectory& traj, const GameParams& params, const char* name) {
    if (!(traj.grid() == params.grid())) {
        throw DimensionMismatch(std::string(name) + " is not on the shared time grid");
    }
}

}  // namespace

Trajectory solve_capital_pi(double lambda, const Trajectory& pi, const GameParams& params,
                            std::size_t ell) {
    params.validate();
    require_grid(pi, params, "pi");
    const double a = params.alpha;
    const double b = params.control_gain();
    const double eta = params.eta;
    const VectorField field = [&pi, a, b, eta, lambda](double t, const Eigen::VectorXd& y) {
        const double p = sample_cubic_scalar(pi, 0, t);
        const double cap = y(0);
        const double rhs =
            (2.0 * (a - b * p) + eta * lambda) * cap + b * lambda * cap * cap + (1.0 - eta * p);
        return Eigen::VectorXd::Constant(1, -rhs);
    };
    IntegrateOptions options;
    options.blowup_threshold = params.blowup_threshold;
    try {
        return integrate(field, Eigen::VectorXd::Zero(1), params.horizon, 0.0, params.dt, options);
    } catch (const BlowUp& e) {
        throw FiniteEscape(e.time, lambda, ell);
    }
}

Trajectory solve_z_ell(double lambda, const Trajectory& capital_pi, const Trajectory& pi, double z0,
                       const GameParams& params) {
    params.validate();
    require_grid(pi, params, "pi");
    require_grid(capital_pi, params, "Pi");
    const double a = params.alpha;
    const double b = params.control_gain();
    const double eta = params.eta;
    const VectorField field = [&pi, &capital_pi, a, b, eta, lambda](double t,
                                                                   const Eigen::VectorXd& y) {
        const double p = sample_cubic_scalar(pi, 0, t);
        const double cap = sample_cubic_scalar(capital_pi, 0, t);
        return Eigen::VectorXd::Constant(1, (a + b * (cap * lambda - p) + eta * lambda) * y(0));
    };
    IntegrateOptions options;
    options.blowup_threshold = params.blowup_threshold;
    return integrate(field, Eigen::VectorXd::Constant(1, z0), 0.0, params.horizon, params.dt, options);
}

LimitSolution solve_limit(const GameParams& params, const FiniteRankGraphon& graphon,
                          const InitialCondition& init) {
    LimitSolution sol;
    sol.params = params;
    sol.graphon = graphon;
    sol.pi = solve_pi(params);

    const std::size_t d = graphon.rank();
    sol.capital_pi.resize(d);
    sol.z.resize(d);
    sol.s.resize(d);
    sol.z0.resize(d);
    kernels::parallel_for(d, [&](std::size_t l) {
        const double lambda = graphon.eigenvalue(l);
        sol.z0[l] = init.z0(lambda, graphon.eigenfunction(l), graphon.quadrature_grid());
        sol.capital_pi[l] = solve_capital_pi(lambda, sol.pi, params, l);
        sol.z[l] = solve_z_ell(lambda, sol.capital_pi[l], sol.pi, sol.z0[l], params);
        sol.s[l] = Trajectory(sol.pi.grid(),
                              sol.capital_pi[l].values().cwiseProduct(sol.z[l].values()));
    });
    return sol;
}

double contraction_margin(double lambda, const Trajectory& pi, const GameParams& params) {
    const double b = params.control_gain();
    if (lambda == 0.0 || b == 0.0) {
        return 0.0;
    }
    const TimeGrid& grid = pi.grid();
    const std::size_t n = grid.steps();
    const double h = grid.dt();

    // drift_int(k) = int_0^{t_k} (alpha - b pi)
    std::vector<double> drift_int(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double left = params.alpha - b * pi.scalar(k - 1);
        const double right = params.alpha - b * pi.scalar(k);
        drift_int[k] = drift_int[k - 1] + 0.5 * h * (left + right);
    }
    // log B(t) = drift_int(t) + eta lambda t - (drift_int(T) - drift_int(t))
    std::vector<double> log_b(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        log_b[k] = 2.0 * drift_int[k] + params.eta * lambda * grid.time(k) - drift_int[n];
    }
    // inner(k) = int_{t_k}^T |1 - eta pi_s| B(s) ds, as a backward cumulative sum.
    std::vector<double> weight(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        weight[k] = std::abs(1.0 - params.eta * pi.scalar(k)) * std::exp(log_b[k]);
    }
    std::vector<double> inner(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        inner[k] = inner[k + 1] + 0.5 * h * (weight[k] + weight[k + 1]);
    }
    double outer = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double left = inner[k] * std::exp(-log_b[k]);
        const double right = inner[k + 1] * std::exp(-log_b[k + 1]);
        outer += 0.5 * h * (left + right);
    }
    return b * std::abs(lambda) * outer;
}

double fbode_residual(const LimitSolution& sol) {
    const GameParams& p = sol.params;
    const double b = p.control_gain();
    const TimeGrid& grid = sol.grid();
    const std::size_t n = grid.steps();
    const double h = grid.dt();
    double worst = 0.0;
    for (std::size_t l = 0; l < sol.rank(); ++l) {
        const double lambda = sol.graphon.eigenvalue(l);
        const Trajectory& z = sol.z[l];
        const Trajectory& s = sol.s[l];
        for (std::size_t k = 1; k < n; ++k) {
            const double drift = p.alpha - b * sol.pi.scalar(k);
            const double z_dot = (z.scalar(k + 1) - z.scalar(k - 1)) / (2.0 * h);
            const double s_dot = (s.scalar(k + 1) - s.scalar(k - 1)) / (2.0 * h);
            const double z_res = z_dot - ((drift + p.eta * lambda) * z.scalar(k) + b * lambda * s.scalar(k));
            const double s_res = s_dot - (-drift * s.scalar(k) - (1.0 - p.eta * sol.pi.scalar(k)) * z.scalar(k));
            worst = std::max({worst, std::abs(z_res), std::abs(s_res)});
        }
        worst = std::max(worst, std::abs(s.back()));
        if (l < sol.z0.size()) {
            worst = std::max(worst, std::abs(z.front() - sol.z0[l]));
        }
    }
    return worst;
}

FieldValue field_at(const LimitSolution& sol, double gamma, double t) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw OutOfRange("gamma = " + std::to_string(gamma) + " outside [0, 1]");
    }
    if (!(t >= 0.0 && t <= sol.params.horizon)) {
        throw OutOfRange("t = " + std::to_string(t) + " outside [0, T]");
    }
    FieldValue out;
    for (std::size_t l = 0; l < sol.rank(); ++l) {
        const double f = sol.graphon.eigenfunction(l)(gamma);
        out.z += sample_scalar(sol.z[l], t) * f;
        out.s += sample_scalar(sol.s[l], t) * f;
    }
    const double ratio = sol.params.beta / sol.params.r;
    out.gain = -ratio * sample_scalar(sol.pi, t);
    out.intercept = ratio * out.s;
    return out;
}

double consistency_error(const LimitSolution& sol, const InitialCondition& init, std::size_t agents) {
    if (agents == 0) {
        throw OutOfRange("consistency check needs at least one agent");
    }
    const GameParams& p = sol.params;
    const double b = p.control_gain();
    const auto m = static_cast<Eigen::Index>(agents);
    const auto d = static_cast<Eigen::Index>(sol.rank());

    Eigen::MatrixXd f_values(m, d);  // f_l(gamma_k)
    Eigen::VectorXd x0(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double gamma = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
        x0(k) = init.limit_profile(gamma);
        for (Eigen::Index l = 0; l < d; ++l) {
            f_values(k, l) = sol.graphon.eigenfunction(static_cast<std::size_t>(l))(gamma);
        }
    }
    // Pack z^l and s^l into one trajectory so a single cubic sample serves both.
    Eigen::MatrixXd zs(2 * d, static_cast<Eigen::Index>(sol.grid().size()));
    for (Eigen::Index l = 0; l < d; ++l) {
        zs.row(l) = sol.z[static_cast<std::size_t>(l)].values().row(0);
        zs.row(d + l) = sol.s[static_cast<std::size_t>(l)].values().row(0);
    }
    const Trajectory zs_traj(sol.grid(), zs);

    const VectorField field = [&](double t, const Eigen::VectorXd& x) {
        const double drift = p.alpha - b * sample_cubic_scalar(sol.pi, 0, t);
        const Eigen::VectorXd coeffs = d > 0 ? sample_cubic(zs_traj, t) : Eigen::VectorXd();
        Eigen::VectorXd dx = drift * x;
        if (d > 0) {
            dx += f_values * (p.eta * coeffs.head(d) + b * coeffs.tail(d));
        }
        return dx;
    };
    IntegrateOptions options;
    options.blowup_threshold = p.blowup_threshold * static_cast<double>(agents);
    const Trajectory states = integrate(field, x0, 0.0, p.horizon, p.dt, options);

    // (A x)(gamma_k) by the midpoint rule = F diag(lambda) F^T x / M
    Eigen::VectorXd lambdas(d);
    for (Eigen::Index l = 0; l < d; ++l) {
        lambdas(l) = sol.graphon.eigenvalue(static_cast<std::size_t>(l));
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        Eigen::VectorXd applied = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd field_now = Eigen::VectorXd::Zero(m);
        if (d > 0) {
            applied = f_values * (lambdas.asDiagonal() * (f_values.transpose() * states.at(k))) /
                      static_cast<double>(m);
            field_now = f_values * zs.col(static_cast<Eigen::Index>(k)).head(d);
        }
        worst = std::max(worst, (applied - field_now).cwiseAbs().maxCoeff());
    }
    return worst;
}

double orthogonal_projection(const LimitSolution& sol, const RealFunction& g, int grid) {
    std::vector<double> pairings(sol.rank());
    for (std::size_t l = 0; l < sol.rank(); ++l) {
        const Eigenfunction& f = sol.graphon.eigenfunction(l);
        pairings[l] = inner_product([&f](double x) { return f(x); }, g, grid);
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.grid().size(); ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < sol.rank(); ++l) {
            acc += sol.z[l].scalar(k) * pairings[l];
        }
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

// ---------------------------------------------------------------------------

namespace {

Trajectory stack(const std::vector<Trajectory>& parts, const TimeGrid& grid) {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(parts.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t l = 0; l < parts.size(); ++l) {
        values.row(static_cast<Eigen::Index>(l)) = parts[l].values().row(0);
    }
    return {grid, std::move(values)};
}

std::vector<Trajectory> unstack(const Trajectory& packed) {
    std::vector<Trajectory> out;
    for (Eigen::Index l = 0; l < packed.dim(); ++l) {
        out.emplace_back(packed.grid(), packed.values().row(l));
    }
    return out;
}

}  // namespace

void save_limit_solution(const LimitSolution& sol, const std::vector<double>& margins,
                         const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);
    write_csv((root / "pi.csv").string(), sol.pi);
    write_csv((root / "Pi_ell.csv").string(), stack(sol.capital_pi, sol.grid()));
    write_csv((root / "z_ell.csv").string(), stack(sol.z, sol.grid()));
    write_csv((root / "s_ell.csv").string(), stack(sol.s, sol.grid()));
    write_spectral((root / "spectrum.txt").string(), sol.graphon, sol.graphon.quadrature_grid());

    nlohmann::ordered_json manifest;
    manifest["params"] = {{"alpha", sol.params.alpha}, {"beta", sol.params.beta},
                          {"eta", sol.params.eta},     {"r", sol.params.r},
                          {"horizon", sol.params.horizon}, {"dt", sol.params.dt}};
    manifest["rank"] = sol.rank();
    manifest["eigenvalues"] = sol.graphon.eigenvalues();
    manifest["z0"] = sol.z0;
    manifest["contraction_margins"] = margins;
    manifest["files"] = {"pi.csv", "Pi_ell.csv", "z_ell.csv", "s_ell.csv", "spectrum.txt"};
    std::ofstream out(root / "manifest.json");
    out << manifest.dump(2) << '\n';
}

LimitSolution load_limit_solution(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream in(root / "manifest.json");
    if (!in) {
        throw Error("no manifest.json in " + dir);
    }
    const auto manifest = nlohmann::json::parse(in);
    LimitSolution sol;
    const auto& params = manifest.at("params");
    sol.params.alpha = params.at("alpha").get<double>();
    sol.params.beta = params.at("beta").get<double>();
    sol.params.eta = params.at("eta").get<double>();
    sol.params.r = params.at("r").get<double>();
    sol.params.horizon = params.at("horizon").get<double>();
    sol.params.dt = params.at("dt").get<double>();
    sol.z0 = manifest.at("z0").get<std::vector<double>>();
    sol.graphon = read_spectral((root / "spectrum.txt").string());
    sol.pi = read_csv((root / "pi.csv").string());
    sol.capital_pi = unstack(read_csv((root / "Pi_ell.csv").string()));
    sol.z = unstack(read_csv((root / "z_ell.csv").string()));
    sol.s = unstack(read_csv((root / "s_ell.csv").string()));
    return sol;
}

}  // namespace lqgfg
