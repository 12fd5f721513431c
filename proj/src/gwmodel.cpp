#include "gwlimit/gwmodel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gwlimit {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kSingularPivot = 1e-14;
constexpr double kExtinctionStep = 1e-14;
constexpr int kExtinctionMaxIters = 1'000'000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_coefficients(const std::vector<double>& p) {
    if (p.size() < 2) throw std::invalid_argument("offspring polynomial needs degree >= 1");
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (!std::isfinite(p[j]) || p[j] < 0.0)
            throw std::invalid_argument("offspring probability p_" + std::to_string(j) +
                                        " is negative or not finite");
    }
}

// Solves (1 - c s(z)) u(z) = rhs(z) by forward substitution in the series ring.
TruncatedSeries solve_one_minus_cs(double c, const TruncatedSeries& s, const TruncatedSeries& rhs) {
    const std::size_t n = s.order();
    const double pivot = 1.0 - c * s[0];
    if (std::abs(pivot) < kSingularPivot) throw std::domain_error("singular rational composition");
    TruncatedSeries u(n);
    for (std::size_t j = 0; j <= n; ++j) {
        double acc = rhs[j];
        for (std::size_t k = 1; k <= j; ++k) acc += c * s[k] * u[j - k];
        u[j] = acc / pivot;
    }
    return u;
}

}  // namespace

Pgf Pgf::polynomial(std::vector<double> p) {
    check_coefficients(p);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw std::invalid_argument("offspring probabilities sum to " + std::to_string(sum) +
                                    ", expected 1");
    return Pgf(Polynomial{std::move(p)});
}

Pgf Pgf::substochastic(std::vector<double> p) {
    check_coefficients(p);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (sum > 1.0 + kSumTolerance) throw std::invalid_argument("offspring probabilities sum above 1");
    return Pgf(Polynomial{std::move(p)});
}

Pgf Pgf::linear_fractional(double b, double c) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("linear-fractional c must lie in (0, 1)");
    if (!(b > 0.0 && b <= 1.0 - c + kSumTolerance))
        throw std::invalid_argument("linear-fractional b must lie in (0, 1 - c]");
    return Pgf(LinearFractional{b, c});
}

double Pgf::p0() const {
    return std::visit(overloaded{
                          [](const Polynomial& poly) { return poly.p[0]; },
                          [](const LinearFractional& lf) { return std::max(0.0, 1.0 - lf.b / (1.0 - lf.c)); },
                      },
                      law_);
}

double Pgf::value(double x) const {
    return std::visit(overloaded{
                          [x](const Polynomial& poly) {
                              double acc = 0.0;
                              for (std::size_t j = poly.p.size(); j-- > 0;) acc = acc * x + poly.p[j];
                              return acc;
                          },
                          [x](const LinearFractional& lf) {
                              return 1.0 - lf.b / (1.0 - lf.c) + lf.b * x / (1.0 - lf.c * x);
                          },
                      },
                      law_);
}

double Pgf::derivative(double x) const {
    return std::visit(overloaded{
                          [x](const Polynomial& poly) {
                              double acc = 0.0;
                              for (std::size_t j = poly.p.size(); j-- > 1;) acc = acc * x + double(j) * poly.p[j];
                              return acc;
                          },
                          [x](const LinearFractional& lf) {
                              const double den = 1.0 - lf.c * x;
                              return lf.b / (den * den);
                          },
                      },
                      law_);
}

double mean(const Pgf& pgf) { return pgf.derivative(1.0); }

double extinction_probability(const Pgf& pgf) {
    if (!(mean(pgf) > 1.0)) throw std::domain_error("mean offspring <= 1");
    if (pgf.p0() == 0.0) return 0.0;

    double q = 0.0;
    for (int it = 0; it < kExtinctionMaxIters; ++it) {
        const double next = pgf.value(q);
        const double step = next - q;
        q = next;
        if (std::abs(step) <= kExtinctionStep) break;
    }
    // P(x) - x is convex and decreasing below the smallest root, so Newton
    // steps from an iterate below q stay below q.
    for (int it = 0; it < 3; ++it) {
        const double f = pgf.value(q) - q;
        const double df = pgf.derivative(q) - 1.0;
        if (!(f > 0.0) || !(df < 0.0)) break;
        const double next = q - f / df;
        if (!(next > q)) break;
        q = next;
    }
    return q;
}

double alpha(const Pgf& pgf) { return invariants(pgf).alpha; }

GwInvariants invariants(const Pgf& pgf) {
    GwInvariants inv{};
    inv.m = mean(pgf);
    inv.q = extinction_probability(pgf);
    inv.pprime_q = pgf.derivative(inv.q);
    if (!(inv.pprime_q > 0.0))
        throw std::domain_error("alpha is +infinity; density vanishes faster than any power");
    inv.alpha = -std::log(inv.pprime_q) / std::log(inv.m) - 1.0;
    return inv;
}

TruncatedSeries pgf_apply_series(const Pgf& pgf, const TruncatedSeries& s) {
    if (pgf.is_polynomial()) return compose_poly(pgf.as_polynomial().p, s);

    const auto& lf = pgf.as_linear_fractional();
    TruncatedSeries u = solve_one_minus_cs(lf.c, s, s);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] *= lf.b;
    u[0] += 1.0 - lf.b / (1.0 - lf.c);
    return u;
}

TruncatedSeries pgf_derivative_apply_series(const Pgf& pgf, const TruncatedSeries& s) {
    if (pgf.is_polynomial()) {
        const auto& p = pgf.as_polynomial().p;
        std::vector<double> dp(p.size() - 1);
        for (std::size_t j = 1; j < p.size(); ++j) dp[j - 1] = double(j) * p[j];
        return compose_poly(dp, s);
    }

    const auto& lf = pgf.as_linear_fractional();
    TruncatedSeries unit(s.order());
    unit[0] = 1.0;
    TruncatedSeries w = solve_one_minus_cs(lf.c, s, solve_one_minus_cs(lf.c, s, unit));
    for (std::size_t j = 0; j < w.size(); ++j) w[j] *= lf.b;
    return w;
}

Truncation truncate_to_polynomial(const LinearFractional& lf, std::size_t K) {
    if (K < 2) throw std::invalid_argument("truncation needs K >= 2");
    std::vector<double> p(K);
    p[0] = std::max(0.0, 1.0 - lf.b / (1.0 - lf.c));
    double term = lf.b;
    for (std::size_t i = 1; i < K; ++i) {
        p[i] = term;
        term *= lf.c;
    }
    const double deficit = lf.b * std::pow(lf.c, double(K - 1)) / (1.0 - lf.c);
    return {Pgf::substochastic(std::move(p)), deficit};
}

}  // namespace gwlimit
