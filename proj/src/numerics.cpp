#include "gwlimit/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gwlimit {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector size mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

// ln Gamma(x) for x >= 0.5.
double lanczos_log_gamma(double x) {
    const double z = x - 1.0;
    double sum = kLanczosCoeffs[0];
    for (std::size_t k = 1; k < kLanczosCoeffs.size(); ++k) sum += kLanczosCoeffs[k] / (z + double(k));
    const double t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

constexpr int kMaxGammaIters = 10000;
constexpr double kGammaEps = 1e-17;

double lower_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxGammaIters; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double upper_continued_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxGammaIters; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma requires x > 0");
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - lanczos_log_gamma(1.0 - x);
    }
    return lanczos_log_gamma(x);
}

std::vector<double> gamma_ratio_products(double alpha, std::size_t n) {
    if (!(alpha > -1.0)) throw std::domain_error("gamma ratios need alpha > -1");
    std::vector<double> r(n + 1);
    r[0] = alpha == 0.0 ? 1.0 : std::exp(-log_gamma(alpha + 1.0));
    for (std::size_t j = 1; j <= n; ++j) r[j] = r[j - 1] * (double(j) / (double(j) + alpha));
    return r;
}

double reg_lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("incomplete gamma requires a > 0");
    if (!(x >= 0.0)) throw std::domain_error("incomplete gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return std::min(1.0, lower_series(a, x));
    return std::max(0.0, 1.0 - upper_continued_fraction(a, x));
}

std::vector<double> qr_least_squares(const DenseMatrix& A, std::span<const double> b) {
    const std::size_t rows = A.rows();
    const std::size_t cols = A.cols();
    if (rows < cols) throw std::invalid_argument("least squares needs rows >= cols");
    if (b.size() != rows) throw std::invalid_argument("least squares rhs has wrong length");

    double frob = 0.0;
    for (double v : A.data()) frob += v * v;
    frob = std::sqrt(frob);

    DenseMatrix R = A;
    std::vector<double> rhs(b.begin(), b.end());
    std::vector<double> v(rows);

    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += R(i, k) * R(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;

        const double alpha = R(k, k) > 0.0 ? -norm : norm;
        for (std::size_t i = k; i < rows; ++i) v[i] = R(i, k);
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < rows; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;

        for (std::size_t j = k; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i] * R(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < rows; ++i) R(i, j) -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < rows; ++i) dot += v[i] * rhs[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < rows; ++i) rhs[i] -= f * v[i];
    }

    for (std::size_t k = 0; k < cols; ++k) {
        if (!(std::abs(R(k, k)) > 1e-14 * frob))
            throw std::runtime_error("rank-deficient least squares (column " + std::to_string(k) + ")");
    }

    std::vector<double> y(cols);
    for (std::size_t k = cols; k-- > 0;) {
        double acc = rhs[k];
        for (std::size_t j = k + 1; j < cols; ++j) acc -= R(k, j) * y[j];
        y[k] = acc / R(k, k);
    }
    return y;
}

std::vector<double> solve_lower_triangular(const DenseMatrix& L, std::span<const double> b) {
    const std::size_t n = L.rows();
    if (L.cols() != n) throw std::invalid_argument("triangular solve needs a square matrix");
    if (b.size() != n) throw std::invalid_argument("triangular solve rhs has wrong length");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (L(i, i) == 0.0)
            throw std::domain_error("zero diagonal in triangular solve (row " + std::to_string(i) + ")");
        double acc = b[i];
        const auto row = L.row(i);
        for (std::size_t j = 0; j < i; ++j) acc -= row[j] * x[j];
        x[i] = acc / L(i, i);
    }
    return x;
}

}  // namespace gwlimit
