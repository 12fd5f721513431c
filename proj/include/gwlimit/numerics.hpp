#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gwlimit {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

    std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// ln Gamma(x) for x > 0 (Lanczos, g = 7). Throws std::domain_error for x <= 0.
double log_gamma(double x);

/// Gamma(j+1) / Gamma(alpha+j+1) for j = 0..n, by the running product
/// r_j = r_{j-1} * j / (j + alpha). One gamma evaluation in total.
std::vector<double> gamma_ratio_products(double alpha, std::size_t n);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double reg_lower_incomplete_gamma(double a, double x);

/// Minimizer of ||A y - b||_2 via Householder QR (rows >= cols).
/// Throws std::runtime_error("rank-deficient least squares ...") if some
/// |R_ii| <= 1e-14 ||A||_F.
std::vector<double> qr_least_squares(const DenseMatrix& A, std::span<const double> b);

/// Forward substitution for square lower-triangular L.
std::vector<double> solve_lower_triangular(const DenseMatrix& L, std::span<const double> b);

}  // namespace gwlimit
