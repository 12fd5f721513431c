#include "gwlimit/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwlimit {

TruncatedSeries::TruncatedSeries(std::size_t order) : coeffs_(order + 1, 0.0) {
    if (order < 1) throw std::invalid_argument("series order must be >= 1");
}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) throw std::invalid_argument("series needs at least two coefficients");
}

TruncatedSeries::TruncatedSeries(std::initializer_list<double> coeffs)
    : TruncatedSeries(std::vector<double>(coeffs)) {}

TruncatedSeries TruncatedSeries::padded(std::span<const double> coeffs, std::size_t order) {
    TruncatedSeries out(order);
    const std::size_t n = std::min(coeffs.size(), order + 1);
    std::copy_n(coeffs.begin(), n, out.coeffs_.begin());
    return out;
}

bool TruncatedSeries::all_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double v) { return std::isfinite(v); });
}

// Terms a_i b_{k-i} and a_{k-i} b_i are added as a pair before accumulating,
// so swapping the operands yields bit-identical results.
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t order) {
    std::vector<double> pa(order + 1, 0.0), pb(order + 1, 0.0);
    std::copy_n(a.coeffs().begin(), std::min(a.size(), order + 1), pa.begin());
    std::copy_n(b.coeffs().begin(), std::min(b.size(), order + 1), pb.begin());

    TruncatedSeries out(order);
    for (std::size_t k = 0; k <= order; ++k) {
        double acc = 0.0;
        std::size_t i = 0;
        for (; 2 * i < k; ++i) acc += pa[i] * pb[k - i] + pa[k - i] * pb[i];
        if (2 * i == k) acc += pa[i] * pb[i];
        out[k] = acc;
    }
    return out;
}

TruncatedSeries compose_poly(std::span<const double> p, const TruncatedSeries& s) {
    if (p.empty()) throw std::invalid_argument("empty polynomial");
    const std::size_t n = s.order();
    TruncatedSeries acc(n);
    acc[0] = p.back();
    for (std::size_t k = p.size() - 1; k-- > 0;) {
        acc = mul(acc, s, n);
        acc[0] += p[k];
    }
    return acc;
}

double eval(const TruncatedSeries& s, double z) {
    double acc = 0.0;
    for (std::size_t j = s.size(); j-- > 0;) acc = acc * z + s[j];
    return acc;
}

}  // namespace gwlimit
