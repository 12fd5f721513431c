#include "gwlimit/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gwlimit {

namespace {

constexpr std::size_t kMaxMomentOrder = 170;
constexpr double kQuantileTol = 1e-10;
constexpr std::size_t kQuantileScan = 512;

void require_model(const DensityModel& model) {
    if (!(model.alpha > -1.0)) throw std::invalid_argument("density model needs alpha > -1");
    if (!(model.beta > 0.0)) throw std::invalid_argument("density model needs beta > 0");
    if (!(model.q >= 0.0 && model.q < 1.0)) throw std::invalid_argument("density model needs q in [0, 1)");
    if (model.coeffs.empty()) throw std::invalid_argument("density model has no coefficients");
}

// u^a e^{-u} for u >= 0, a > -1.
double damped_power(double u, double a) {
    if (u == 0.0) return a > 0.0 ? 0.0 : (a == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    return std::exp(a * std::log(u) - u);
}

// int_0^x of the continuous part, before clamping.
double continuous_cdf(const DensityModel& model, double x) {
    if (x <= 0.0) return 0.0;
    const double a1 = model.alpha + 1.0;
    const double gamma_a1 = std::exp(log_gamma(a1));
    if (std::isinf(x)) return model.coeffs[0] * gamma_a1 / model.beta;

    // d/du [u^{a+1} e^{-u} L_{j-1}^{(a+1)}(u)] = j u^a e^{-u} L_j^{(a)}(u) for j >= 1.
    const double u = model.beta * x;
    double acc = model.coeffs[0] * gamma_a1 * reg_lower_incomplete_gamma(a1, u);
    const std::size_t s = model.coeffs.size() - 1;
    if (s > 0) {
        const auto lag = laguerre_sequence(s - 1, a1, u);
        const double weight = damped_power(u, a1);
        double sum = 0.0;
        for (std::size_t j = 1; j <= s; ++j) sum += model.coeffs[j] * lag[j - 1] / double(j);
        acc += weight * sum;
    }
    return acc / model.beta;
}

}  // namespace

MomentVector::MomentVector(std::vector<double> moments) : moments_(std::move(moments)) {
    if (moments_.size() < 2) throw std::invalid_argument("moment vector needs m_0 and m_1");
    if (std::abs(moments_[0] - 1.0) > 1e-12) throw std::invalid_argument("moment vector needs m_0 = 1");
    for (double m : moments_) {
        if (!std::isfinite(m) || !(m > 0.0)) throw std::runtime_error("invalid moment sequence");
    }
}

MomentVector moments_from_coeffs(const TruncatedSeries& phi) {
    if (phi[0] != 1.0 || phi[1] != -1.0)
        throw std::invalid_argument("coefficients must satisfy phi_0 = 1 and phi_1 = -1");
    if (phi.order() > kMaxMomentOrder)
        throw std::invalid_argument("moment order above 170 overflows i!; reduce N");
    std::vector<double> m(phi.size());
    double factorial = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (i > 0) factorial *= double(i);
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        m[i] = sign * factorial * phi[i];
        if (!std::isfinite(m[i]) || !(m[i] > 0.0)) throw std::runtime_error("invalid moment sequence");
    }
    return MomentVector(std::move(m));
}

std::vector<double> laguerre_sequence(std::size_t n, double alpha, double x) {
    std::vector<double> L(n + 1);
    L[0] = 1.0;
    if (n >= 1) L[1] = 1.0 + alpha - x;
    for (std::size_t j = 2; j <= n; ++j) {
        const double dj = double(j);
        L[j] = ((2.0 * dj + alpha - 1.0 - x) * L[j - 1] - (dj + alpha - 1.0) * L[j - 2]) / dj;
    }
    return L;
}

double laguerre_eval(std::size_t j, double alpha, double x) { return laguerre_sequence(j, alpha, x)[j]; }

DenseMatrix pascal_matrix(std::size_t N, std::size_t S) {
    if (S > N) throw std::invalid_argument("pascal matrix needs N >= S");
    DenseMatrix M(N + 1, S + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        M(i, 0) = 1.0;
        for (std::size_t j = 1; j <= std::min(i, S); ++j) M(i, j) = M(i - 1, j - 1) + (j < i ? M(i - 1, j) : 0.0);
    }
    return M;
}

std::vector<double> rhs_vector(const MomentVector& moments, double q, double alpha, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(alpha > -1.0)) throw std::invalid_argument("alpha must exceed -1");
    const std::size_t n = moments.order();
    const auto ratio = gamma_ratio_products(alpha, n);
    std::vector<double> b(n + 1);
    b[0] = beta * (1.0 - q) * ratio[0];
    double beta_pow = beta;
    double factorial = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        beta_pow *= beta;
        factorial *= double(i);
        b[i] = beta_pow * ratio[i] * (moments[i] / factorial);
        if (!std::isfinite(b[i])) throw std::runtime_error("rhs overflow; reduce N or rescale");
    }
    return b;
}

DenseMatrix basis_moment_matrix(std::size_t N, std::size_t S, double alpha, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(alpha > -1.0)) throw std::invalid_argument("alpha must exceed -1");
    const DenseMatrix binom = pascal_matrix(N, std::min(N, S));
    DenseMatrix B(N + 1, S + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        const double scale = std::exp(log_gamma(alpha + double(i) + 1.0) - double(i + 1) * std::log(beta));
        for (std::size_t j = 0; j <= std::min(i, S); ++j) B(i, j) = (j % 2 == 0 ? 1.0 : -1.0) * scale * binom(i, j);
    }
    return B;
}

std::vector<double> model_moments(const DensityModel& model, std::size_t N) {
    require_model(model);
    const DenseMatrix B = basis_moment_matrix(N, model.coeffs.size() - 1, model.alpha, model.beta);
    std::vector<double> m = B.multiply(model.coeffs);
    m[0] += model.q;
    return m;
}

double continuous_mass(const DensityModel& model) {
    require_model(model);
    return model.coeffs[0] * std::exp(log_gamma(model.alpha + 1.0)) / model.beta;
}

DensityModel fit_density(const MomentVector& moments, double q, double alpha, double beta,
                         std::optional<std::size_t> basis_size) {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in [0, 1)");
    const std::size_t n = moments.order();
    const std::size_t cols = basis_size.value_or((n + 1) / 2);
    if (cols < 1 || cols > n + 1) throw std::invalid_argument("basis size must lie in [1, N+1]");

    DenseMatrix M = pascal_matrix(n, cols - 1);
    std::vector<double> b = rhs_vector(moments, q, alpha, beta);
    for (std::size_t i = 0; i <= n; ++i) {
        double row_max = 0.0;
        for (std::size_t j = 0; j < cols; ++j) row_max = std::max(row_max, M(i, j));
        for (std::size_t j = 0; j < cols; ++j) M(i, j) /= row_max;
        b[i] /= row_max;
    }
    std::vector<double> y = qr_least_squares(M, b);
    for (std::size_t j = 1; j < y.size(); j += 2) y[j] = -y[j];
    return DensityModel{q, alpha, beta, std::move(y)};
}

double density_at(const DensityModel& model, double x) {
    require_model(model);
    if (x < 0.0) return 0.0;
    const double u = model.beta * x;
    const auto lag = laguerre_sequence(model.coeffs.size() - 1, model.alpha, u);
    double sum = 0.0;
    for (std::size_t j = 0; j < lag.size(); ++j) sum += model.coeffs[j] * lag[j];
    if (sum == 0.0) return 0.0;
    return sum * damped_power(u, model.alpha);
}

double cdf_at(const DensityModel& model, double x) {
    require_model(model);
    if (x < 0.0) return 0.0;
    return std::clamp(model.q + continuous_cdf(model, x), 0.0, 1.0);
}

std::vector<double> monotone_cdf(const DensityModel& model, std::span<const double> xs) {
    std::vector<double> out(xs.size());
    double running = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0 && xs[i] < xs[i - 1]) throw std::invalid_argument("monotone_cdf needs an increasing grid");
        running = std::max(running, cdf_at(model, xs[i]));
        out[i] = running;
    }
    return out;
}

double conditional_cdf(const DensityModel& model, double x) {
    return (cdf_at(model, x) - model.q) / (1.0 - model.q);
}

double quantile(const DensityModel& model, double p) {
    require_model(model);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");

    double hi = 1.0 / model.beta;
    int doublings = 0;
    while (conditional_cdf(model, hi) < p) {
        if (++doublings > 200) throw std::runtime_error("conditional CDF never reaches p; continuous mass too small");
        hi *= 2.0;
    }

    // First grid point at which the CDF reaches p; the running maximum below
    // that point is still under p, so bisection on [lo, hi] finds the first crossing.
    double lo = 0.0;
    for (std::size_t k = 1; k <= kQuantileScan; ++k) {
        const double x = hi * double(k) / double(kQuantileScan);
        if (conditional_cdf(model, x) >= p) {
            lo = hi * double(k - 1) / double(kQuantileScan);
            hi = x;
            break;
        }
    }

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = conditional_cdf(model, mid);
        if (std::abs(f - p) <= kQuantileTol) return mid;
        if (f < p) lo = mid;
        else hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gwlimit
