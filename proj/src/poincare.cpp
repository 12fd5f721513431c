#include "gwlimit/poincare.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gwlimit/numerics.hpp"

namespace gwlimit {

namespace {

constexpr double kTiny = 1e-300;

std::vector<double> powers(double m, std::size_t n) {
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j) out[j] = std::pow(m, double(j));
    return out;
}

double residual_from(const TruncatedSeries& phi, const TruncatedSeries& r, const std::vector<double>& mpow) {
    double worst = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double lhs = mpow[j] * phi[j];
        const double term = std::abs(r[j]) < kTiny ? std::abs(lhs - r[j]) : std::abs(1.0 - lhs / r[j]);
        // NaN must propagate rather than be swallowed by the comparison.
        if (!(term <= worst)) worst = term;
    }
    return worst;
}

void require_supercritical(const Pgf& pgf) {
    if (!(mean(pgf) > 1.0)) throw std::domain_error("mean offspring <= 1");
}

TruncatedSeries initial_iterate(const SolverConfig& cfg) {
    if (cfg.order < 2) throw std::invalid_argument("solver order must be >= 2");
    if (!cfg.initial) {
        TruncatedSeries phi(cfg.order);
        phi[0] = 1.0;
        phi[1] = -1.0;
        return phi;
    }
    TruncatedSeries phi = TruncatedSeries::padded(cfg.initial->coeffs(), cfg.order);
    if (phi[0] != 1.0 || phi[1] != -1.0)
        throw std::invalid_argument("initial iterate must satisfy phi_0 = 1 and phi_1 = -1");
    return phi;
}

// Iterative solvers need a polynomial; linear-fractional laws are truncated.
Pgf polynomial_for_iteration(const Pgf& pgf, std::size_t order, std::vector<std::string>& warnings) {
    if (pgf.is_polynomial()) return pgf;
    auto trunc = truncate_to_polynomial(pgf.as_linear_fractional(), order + 1);
    std::ostringstream msg;
    msg << "linear-fractional law truncated to " << order + 1 << " coefficients; probability deficit "
        << std::scientific << std::setprecision(3) << trunc.deficit;
    warnings.push_back(msg.str());
    return trunc.pgf;
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Forward: return "forward";
        case Method::FixedPoint: return "fixed";
        case Method::Newton: return "newton";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "forward") return Method::Forward;
    if (name == "fixed") return Method::FixedPoint;
    if (name == "newton") return Method::Newton;
    throw std::invalid_argument("unknown solver method '" + std::string(name) + "'");
}

double default_tolerance(Method method) { return method == Method::FixedPoint ? 1e-8 : 1e-14; }

int default_max_iterations(Method method) { return method == Method::FixedPoint ? 10000 : 50; }

double residual(const TruncatedSeries& phi, const Pgf& pgf) {
    return residual_from(phi, pgf_apply_series(pgf, phi), powers(mean(pgf), phi.order()));
}

SolveReport solve_forward(const Pgf& pgf, const SolverConfig& cfg) {
    require_supercritical(pgf);
    if (cfg.order < 2) throw std::invalid_argument("solver order must be >= 2");

    const std::size_t n = cfg.order;
    const double m = mean(pgf);
    const double diag = pgf.derivative(1.0);

    SolveReport report;
    report.method = Method::Forward;
    report.phi = TruncatedSeries(n);
    report.phi[0] = 1.0;
    report.phi[1] = -1.0;

    for (std::size_t k = 2; k <= n; ++k) {
        // phi_k is still zero here, so the composition sees exactly phi~.
        const TruncatedSeries partial = TruncatedSeries::padded(report.phi.coeffs(), k);
        const double numerator = pgf_apply_series(pgf, partial)[k];
        const double denominator = std::pow(m, double(k)) - diag;
        if (std::abs(denominator) < kTiny) throw std::domain_error("degenerate recursion");
        report.phi[k] = numerator / denominator;
    }

    report.iterations = static_cast<int>(n - 1);
    report.final_residual = residual(report.phi, pgf);
    report.residual_history = {report.final_residual};
    report.converged = std::isfinite(report.final_residual);
    return report;
}

SolveReport solve_fixed_point(const Pgf& input, const SolverConfig& cfg) {
    require_supercritical(input);
    SolveReport report;
    report.method = Method::FixedPoint;
    const Pgf pgf = polynomial_for_iteration(input, cfg.order, report.warnings);

    const double tol = cfg.tol.value_or(default_tolerance(Method::FixedPoint));
    const int max_iters = cfg.max_iters.value_or(default_max_iterations(Method::FixedPoint));
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    TruncatedSeries phi = initial_iterate(cfg);
    const auto mpow = powers(mean(pgf), phi.order());

    for (int k = 1; k <= max_iters; ++k) {
        const TruncatedSeries image = pgf_apply_series(pgf, phi);
        const double res = residual_from(phi, image, mpow);
        report.residual_history.push_back(res);
        report.iterations = k;
        if (res <= tol) {
            report.converged = true;
            break;
        }
        if (k == max_iters) break;

        for (std::size_t j = 2; j < phi.size(); ++j) phi[j] = image[j] / mpow[j];
        phi[0] = 1.0;
        phi[1] = -1.0;
    }

    report.phi = std::move(phi);
    report.final_residual = report.residual_history.back();
    return report;
}

SolveReport solve_newton(const Pgf& input, const SolverConfig& cfg) {
    require_supercritical(input);
    SolveReport report;
    report.method = Method::Newton;
    const Pgf pgf = polynomial_for_iteration(input, cfg.order, report.warnings);

    const double tol = cfg.tol.value_or(default_tolerance(Method::Newton));
    const int max_iters = cfg.max_iters.value_or(default_max_iterations(Method::Newton));
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    TruncatedSeries phi = initial_iterate(cfg);
    const std::size_t n = phi.order();
    const auto mpow = powers(mean(pgf), n);
    const std::size_t unknowns = n - 1;

    for (int k = 1; k <= max_iters; ++k) {
        const TruncatedSeries image = pgf_apply_series(pgf, phi);
        const double res = residual_from(phi, image, mpow);
        report.residual_history.push_back(res);
        report.iterations = k;
        if (res <= tol) {
            report.converged = true;
            break;
        }
        if (k == max_iters) break;

        const TruncatedSeries gamma = pgf_derivative_apply_series(pgf, phi);
        DenseMatrix jac(unknowns, unknowns);
        std::vector<double> defect(unknowns);
        for (std::size_t i = 0; i < unknowns; ++i) {
            const double d = mpow[i + 2] - gamma[0];
            if (std::abs(d) < kTiny) throw std::domain_error("singular Newton Jacobian diagonal");
            jac(i, i) = d;
            for (std::size_t l = 0; l < i; ++l) jac(i, l) = -gamma[i - l];
            defect[i] = mpow[i + 2] * phi[i + 2] - image[i + 2];
        }
        const auto step = solve_lower_triangular(jac, defect);
        for (std::size_t i = 0; i < unknowns; ++i) phi[i + 2] -= step[i];
        phi[0] = 1.0;
        phi[1] = -1.0;
    }

    report.phi = std::move(phi);
    report.final_residual = report.residual_history.back();
    return report;
}

SolveReport solve(const Pgf& pgf, Method method, const SolverConfig& cfg) {
    switch (method) {
        case Method::Forward: return solve_forward(pgf, cfg);
        case Method::FixedPoint: return solve_fixed_point(pgf, cfg);
        case Method::Newton: return solve_newton(pgf, cfg);
    }
    throw std::invalid_argument("unknown solver method");
}

}  // namespace gwlimit
