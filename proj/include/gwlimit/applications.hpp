#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gwlimit/reconstruct.hpp"

namespace gwlimit {

struct EstablishmentQuery {
    double threshold_K = 100.0;
    DensityModel model;
    double m = 2.0;
};

/// g(t) = f+(K m^{-t}) K m^{-t} ln m, with f+ the density of W | W > 0.
/// Raw: no clipping of negative t and no clamping of negative density.
double establishment_density(const EstablishmentQuery& query, double t);

/// P(tau_K <= t) = 1 - F+(K m^{-t}).
double establishment_cdf(const EstablishmentQuery& query, double t);

/// Probability that the integer establishment time max{0, ceil(tau_K)} equals
/// n, for n = 0..n_max, from unit-interval increments of establishment_cdf.
std::vector<double> establishment_pmf(const EstablishmentQuery& query, std::size_t n_max);

/// (m^n Q_{(1-level)/2}, m^n Q_{(1+level)/2}) with Q the conditional quantiles
/// of W | W > 0.
std::pair<double, double> prediction_interval(const DensityModel& model, double m, int n, double level);

/// P(Z_n >= K | W > 0) ~ 1 - F+(K m^{-n}).
double exceedance_probability(const DensityModel& model, double m, int n, double K);

/// Moments of the sum of k independent copies, by repeated binomial
/// convolution. Throws std::runtime_error("reduce N or k") on overflow.
MomentVector moments_of_sum(const MomentVector& moments, int k);

/// Atom at zero of the k-copy sum, q^k.
double sum_atom(double q, int k);

}  // namespace gwlimit
