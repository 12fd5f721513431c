#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gwlimit {

/// Power series truncated after the z^order term.
///
/// Coefficient j multiplies z^j. Every operation silently drops terms above
/// the requested order, so the type models the ring R[z]/(z^{order+1}).
class TruncatedSeries {
public:
    /// Zero series of the given order (order >= 1).
    explicit TruncatedSeries(std::size_t order);

    /// Takes ownership of coeffs; order = coeffs.size() - 1.
    explicit TruncatedSeries(std::vector<double> coeffs);
    TruncatedSeries(std::initializer_list<double> coeffs);

    /// `coeffs` zero-padded (or cut) to order.
    static TruncatedSeries padded(std::span<const double> coeffs, std::size_t order);

    std::size_t order() const { return coeffs_.size() - 1; }
    std::size_t size() const { return coeffs_.size(); }

    double operator[](std::size_t j) const { return coeffs_[j]; }
    double& operator[](std::size_t j) { return coeffs_[j]; }

    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }

    bool all_finite() const;

    friend bool operator==(const TruncatedSeries&, const TruncatedSeries&) = default;

private:
    std::vector<double> coeffs_;
};

/// Cauchy product truncated at `order`. Inputs shorter than order are treated
/// as zero-padded.
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t order);

/// First s.order()+1 Taylor coefficients of P(s(z)) where
/// P(z) = p[0] + p[1] z + ... + p[d] z^d, by Horner's rule in the series ring.
///
/// Throws std::invalid_argument("empty polynomial") if p is empty.
TruncatedSeries compose_poly(std::span<const double> p, const TruncatedSeries& s);

/// Horner evaluation of sum_j s_j z^j.
double eval(const TruncatedSeries& s, double z);

}  // namespace gwlimit
