#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "gwlimit/series.hpp"

namespace gwlimit {

/// Offspring law with finite support: P(z) = sum_j p[j] z^j.
struct Polynomial {
    std::vector<double> p;
};

/// P(z) = 1 - b/(1-c) + b z / (1 - c z), i.e. p_0 = 1 - b/(1-c) and
/// p_i = b c^{i-1} for i >= 1.
struct LinearFractional {
    double b;
    double c;
};

/// Offspring probability generating function.
///
/// Factories validate once; afterwards the coefficients are trusted. A
/// polynomial must have nonnegative coefficients summing to 1 within 1e-12.
/// `substochastic` relaxes the sum to <= 1 for truncated series, which carry
/// a known coefficient deficit.
class Pgf {
public:
    static Pgf polynomial(std::vector<double> p);
    static Pgf substochastic(std::vector<double> p);
    static Pgf linear_fractional(double b, double c);

    bool is_polynomial() const { return std::holds_alternative<Polynomial>(law_); }
    const Polynomial& as_polynomial() const { return std::get<Polynomial>(law_); }
    const LinearFractional& as_linear_fractional() const { return std::get<LinearFractional>(law_); }

    /// P(0).
    double p0() const;
    /// P(x) and P'(x) for real x in the disk of convergence.
    double value(double x) const;
    double derivative(double x) const;

private:
    explicit Pgf(std::variant<Polynomial, LinearFractional> law) : law_(std::move(law)) {}
    std::variant<Polynomial, LinearFractional> law_;
};

struct GwInvariants {
    double m;
    double q;
    double alpha;
    double pprime_q;
};

/// m = P'(1).
double mean(const Pgf& pgf);

/// Smallest nonnegative root of P(z) = z, by monotone iteration q <- P(q)
/// from 0. Returns exactly 0 when p_0 = 0.
/// Throws std::domain_error("mean offspring <= 1") for non-supercritical laws.
double extinction_probability(const Pgf& pgf);

/// Near-zero exponent -log P'(q)/log m - 1 of the density of W.
/// Throws std::domain_error when P'(q) = 0 (alpha is +infinity).
double alpha(const Pgf& pgf);

GwInvariants invariants(const Pgf& pgf);

/// Taylor coefficients of P(s(z)) to s.order().
TruncatedSeries pgf_apply_series(const Pgf& pgf, const TruncatedSeries& s);

/// Taylor coefficients of P'(s(z)) to s.order().
TruncatedSeries pgf_derivative_apply_series(const Pgf& pgf, const TruncatedSeries& s);

struct Truncation {
    Pgf pgf;
    /// 1 - sum of the retained coefficients, i.e. b c^{K-1} / (1 - c).
    double deficit;
};

/// Keeps p_0 .. p_{K-1} of the series expansion, without renormalizing.
Truncation truncate_to_polynomial(const LinearFractional& lf, std::size_t K);

}  // namespace gwlimit
