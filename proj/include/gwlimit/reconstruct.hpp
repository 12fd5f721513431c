#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gwlimit/numerics.hpp"
#include "gwlimit/series.hpp"

namespace gwlimit {

/// Raw moments m_0..m_N of a nonnegative random variable.
///
/// Validated on construction: m_0 = 1 (within 1e-12), every entry finite and
/// strictly positive. For W itself m_1 = 1; sums of k copies have m_1 = k.
class MomentVector {
public:
    explicit MomentVector(std::vector<double> moments);

    std::size_t order() const { return moments_.size() - 1; }
    double operator[](std::size_t i) const { return moments_[i]; }
    std::span<const double> values() const { return moments_; }

private:
    std::vector<double> moments_;
};

/// Atom at zero plus a damped generalized-Laguerre expansion:
///   f(x) = q delta_0(x) + sum_j c_j L_j^{(alpha)}(beta x) (beta x)^alpha e^{-beta x}.
struct DensityModel {
    double q = 0.0;
    double alpha = 0.0;
    double beta = 1.0;
    std::vector<double> coeffs;
};

/// m_i = (-1)^i i! phi_i. Orders above 170 overflow i! and are rejected.
/// Throws std::runtime_error("invalid moment sequence") on nonpositive or
/// non-finite moments.
MomentVector moments_from_coeffs(const TruncatedSeries& phi);

/// L_j^{(alpha)}(x) by the three-term recurrence.
double laguerre_eval(std::size_t j, double alpha, double x);

/// L_0^{(alpha)}(x) .. L_n^{(alpha)}(x) in one recurrence pass.
std::vector<double> laguerre_sequence(std::size_t n, double alpha, double x);

/// (N+1) x (S+1) lower-triangular matrix of binomials binom(i, j), built with
/// the additive Pascal rule.
DenseMatrix pascal_matrix(std::size_t N, std::size_t S);

/// Right-hand side of M y = b: b_0 = beta (1-q) / Gamma(alpha+1) and
/// b_i = beta^{i+1} Gamma(i+1)/Gamma(alpha+i+1) * m_i / i!.
std::vector<double> rhs_vector(const MomentVector& moments, double q, double alpha, double beta);

/// Closed form of the basis moments
///   b_{i,j} = int_0^inf x^{i+alpha} beta^alpha L_j^{(alpha)}(beta x) e^{-beta x} dx
///           = (-1)^j beta^{-i-1} Gamma(alpha+i+1) binom(i, j),
/// an (N+1) x (S+1) matrix.
DenseMatrix basis_moment_matrix(std::size_t N, std::size_t S, double alpha, double beta);

/// Moments m_0..m_N of a model (atom included).
std::vector<double> model_moments(const DensityModel& model, std::size_t N);

/// Mass of the continuous part, c_0 Gamma(alpha+1) / beta.
double continuous_mass(const DensityModel& model);

/// Moment-matched fit. Uses S+1 = floor((N+1)/2) basis functions unless
/// `basis_size` is given, scales each row of the Pascal system by its largest
/// retained entry and solves the least-squares problem by Householder QR.
DensityModel fit_density(const MomentVector& moments, double q, double alpha, double beta,
                         std::optional<std::size_t> basis_size = {});

/// Continuous part of the density at x > 0, unclamped (it can dip below 0).
double density_at(const DensityModel& model, double x);

/// q + int_0^x f, clamped to [0, 1]. Not monotone in general; see
/// `monotone_cdf` and `quantile`.
double cdf_at(const DensityModel& model, double x);

/// cdf_at on an increasing grid, with a running maximum applied.
std::vector<double> monotone_cdf(const DensityModel& model, std::span<const double> xs);

/// Conditional CDF of W | W > 0: (cdf_at(x) - q) / (1 - q).
double conditional_cdf(const DensityModel& model, double x);

/// p-quantile of W | W > 0, the smallest x where the running-maximum
/// conditional CDF reaches p. Solved to |F(x) - p| <= 1e-10.
/// Throws std::invalid_argument for p outside (0, 1).
double quantile(const DensityModel& model, double p);

}  // namespace gwlimit
