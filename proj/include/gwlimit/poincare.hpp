#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gwlimit/gwmodel.hpp"
#include "gwlimit/series.hpp"

namespace gwlimit {

enum class Method { Forward, FixedPoint, Newton };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Knobs shared by the three solvers. Unset fields take per-method defaults:
/// tol 1e-8 / max_iters 10000 for the fixed-point map, tol 1e-14 / max_iters
/// 50 for Newton. The initial iterate defaults to 1 - z.
struct SolverConfig {
    std::size_t order = 80;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::optional<TruncatedSeries> initial;
};

/// `iterations` counts residual checks: each pass evaluates P(phi), records
/// Res(phi) in `residual_history`, stops if it is <= tol and otherwise
/// updates phi. history[0] is the residual of the initial iterate and the
/// returned phi is always the last iterate checked.
struct SolveReport {
    TruncatedSeries phi = TruncatedSeries(std::size_t{1});
    int iterations = 0;
    double final_residual = 0.0;
    Method method = Method::Newton;
    std::vector<double> residual_history;
    bool converged = false;
    std::vector<std::string> warnings;
};

double default_tolerance(Method method);
int default_max_iterations(Method method);

/// max_j |1 - m^j phi_j / r_j| with r = P(phi). Indices where |r_j| < 1e-300
/// contribute |m^j phi_j - r_j| instead.
double residual(const TruncatedSeries& phi, const Pgf& pgf);

/// Direct recursion phi_k = [P(phi~)]_k / (m^k - P'(phi_0)) for k = 2..N,
/// where phi~ holds the coefficients found so far. Works for any analytic
/// P, including linear-fractional laws.
SolveReport solve_forward(const Pgf& pgf, const SolverConfig& cfg = {});

/// phi <- diag(1, m, ..., m^N)^{-1} P(phi), with phi_0 = 1 and phi_1 = -1
/// re-pinned after every sweep. Linear-fractional input is truncated to
/// order+1 coefficients first, with a warning that reports the deficit.
SolveReport solve_fixed_point(const Pgf& pgf, const SolverConfig& cfg = {});

/// Newton's method on phi(mz) - P(phi(z)) = 0 for the unknowns phi_2..phi_N.
/// The Jacobian is lower triangular (diagonal m^k - m, Toeplitz band from
/// P'(phi)), so each step costs one O(N^2) forward substitution.
SolveReport solve_newton(const Pgf& pgf, const SolverConfig& cfg = {});

SolveReport solve(const Pgf& pgf, Method method, const SolverConfig& cfg = {});

}  // namespace gwlimit
