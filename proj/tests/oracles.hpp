// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerics, so agreement is a genuine cross-check.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gwlimit/reconstruct.hpp"

namespace oracle {

/// int_0^inf f, split at `split` so that an integrable singularity at 0 is
/// handled by tanh-sinh and the tail by exp-sinh.
inline double integrate_half_line(const std::function<double(double)>& f, double split = 1.0) {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double head = ts.integrate(f, 0.0, split);
    const double tail = es.integrate([&](double x) { return f(x + split); });
    return head + tail;
}

/// int_0^b f where f may have an integrable singularity at 0: tanh-sinh near
/// the origin, adaptive Gauss-Kronrod beyond `split`.
inline double integrate_from_zero(const std::function<double(double)>& f, double b, double split) {
    boost::math::quadrature::tanh_sinh<double> ts;
    if (b <= split) return ts.integrate(f, 0.0, b);
    return ts.integrate(f, 0.0, split) +
           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, split, b, 15, 1e-13);
}

/// int_a^b f by adaptive 61-point Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

/// Generalized binomial binom(j + alpha, j - k) via Gamma functions.
inline double gen_binomial(double top, double bottom) {
    return std::exp(std::lgamma(top + 1.0) - std::lgamma(bottom + 1.0) - std::lgamma(top - bottom + 1.0));
}

/// L_j^{(alpha)}(x) = sum_k (-1)^k binom(j+alpha, j-k) x^k / k!, summed in
/// long double with product-form binomials. The sum cancels heavily for large
/// x, so this is only a faithful reference for moderate j and x.
inline double laguerre_explicit(int j, double alpha, double x) {
    long double sum = 0.0L;
    long double power_over_fact = 1.0L;  // x^k / k!
    for (int k = 0; k <= j; ++k) {
        if (k > 0) power_over_fact *= static_cast<long double>(x) / k;
        long double binom = 1.0L;  // binom(j + alpha, j - k) = prod_{r=1}^{j-k} (k + alpha + r) / r
        for (int r = 1; r <= j - k; ++r) binom *= (k + static_cast<long double>(alpha) + r) / r;
        sum += ((k % 2 == 0) ? 1.0L : -1.0L) * binom * power_over_fact;
    }
    return static_cast<double>(sum);
}

/// CDF of a Laguerre model by expanding each L_j into monomials and
/// integrating term by term with the regularized incomplete gamma function.
inline double cdf_monomial(const gwlimit::DensityModel& model, double x) {
    const double u = model.beta * x;
    double acc = 0.0;
    for (std::size_t j = 0; j < model.coeffs.size(); ++j) {
        double term = 0.0;
        for (std::size_t k = 0; k <= j; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            const double a = model.alpha + double(k) + 1.0;
            const double w = sign * gen_binomial(double(j) + model.alpha, double(j - k)) / std::tgamma(double(k) + 1.0);
            term += w * std::tgamma(a) * boost::math::gamma_p(a, u);
        }
        acc += model.coeffs[j] * term;
    }
    return model.q + acc / model.beta;
}

/// Continuous part of a Laguerre model, written out directly.
inline double density_explicit(const gwlimit::DensityModel& model, double x) {
    const double u = model.beta * x;
    double sum = 0.0;
    for (std::size_t j = 0; j < model.coeffs.size(); ++j)
        sum += model.coeffs[j] * laguerre_explicit(int(j), model.alpha, u);
    return sum * std::pow(u, model.alpha) * std::exp(-u);
}

/// b_{i,j} = int_0^inf x^{i+alpha} beta^alpha L_j^{(alpha)}(beta x) e^{-beta x} dx by quadrature.
inline double basis_moment_quadrature(int i, int j, double alpha, double beta) {
    auto f = [=](double x) {
        // e^{-beta x} wins long before x^{i+j} overflows.
        if (x == 0.0 || beta * x > 2000.0) return 0.0;
        return laguerre_explicit(j, alpha, beta * x) * std::exp((i + alpha) * std::log(x) + alpha * std::log(beta) - beta * x);
    };
    return integrate_half_line(f, 1.0 / beta);
}

/// Random offspring law on {0..d} with mean m: p_j proportional to
/// u_j exp(theta j) with u_j ~ U(0,1), theta set by bisection.
inline std::vector<double> random_pgf(int d, double m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(d + 1);
    for (auto& x : u) x = unif(rng);
    auto probs = [&](double theta) {
        std::vector<double> p(d + 1);
        double total = 0.0;
        for (int j = 0; j <= d; ++j) total += (p[j] = u[j] * std::exp(theta * j));
        for (auto& x : p) x /= total;
        return p;
    };
    auto mean_of = [&](double theta) {
        const auto p = probs(theta);
        double s = 0.0;
        for (int j = 0; j <= d; ++j) s += j * p[j];
        return s;
    };
    double lo = -50.0;
    double hi = 50.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_of(mid) < m ? lo : hi) = mid;
    }
    auto p = probs(0.5 * (lo + hi));
    double total = 0.0;
    for (double x : p) total += x;
    for (auto& x : p) x /= total;
    return p;
}

/// Moments i! of Exp(1), i = 0..n.
inline std::vector<double> exponential_moments(int n) {
    std::vector<double> m(n + 1);
    double f = 1.0;
    for (int i = 0; i <= n; ++i) {
        if (i > 0) f *= i;
        m[i] = f;
    }
    return m;
}

}  // namespace oracle
