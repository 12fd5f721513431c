#include "gwlimit/applications.hpp"

#include <cmath>
#include <stdexcept>

namespace gwlimit {

namespace {

void require_query(const EstablishmentQuery& query) {
    if (!(query.threshold_K > 0.0)) throw std::invalid_argument("threshold K must be positive");
    if (!(query.m > 1.0)) throw std::invalid_argument("mean offspring must exceed 1");
}

}  // namespace

double establishment_density(const EstablishmentQuery& query, double t) {
    require_query(query);
    const double w = query.threshold_K * std::pow(query.m, -t);
    return density_at(query.model, w) / (1.0 - query.model.q) * w * std::log(query.m);
}

double establishment_cdf(const EstablishmentQuery& query, double t) {
    require_query(query);
    return 1.0 - conditional_cdf(query.model, query.threshold_K * std::pow(query.m, -t));
}

std::vector<double> establishment_pmf(const EstablishmentQuery& query, std::size_t n_max) {
    std::vector<double> pmf(n_max + 1);
    double prev = establishment_cdf(query, 0.0);
    pmf[0] = prev;
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double cur = establishment_cdf(query, double(n));
        pmf[n] = cur - prev;
        prev = cur;
    }
    return pmf;
}

std::pair<double, double> prediction_interval(const DensityModel& model, double m, int n, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    if (n < 0) throw std::invalid_argument("generation n must be >= 0");
    if (!(m > 0.0)) throw std::invalid_argument("mean offspring must be positive");
    const double growth = std::pow(m, n);
    const double tail = 0.5 * (1.0 - level);
    return {growth * quantile(model, tail), growth * quantile(model, 1.0 - tail)};
}

double exceedance_probability(const DensityModel& model, double m, int n, double K) {
    if (!(K > 0.0)) throw std::invalid_argument("K must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("mean offspring must be positive");
    return 1.0 - conditional_cdf(model, K * std::pow(m, -n));
}

MomentVector moments_of_sum(const MomentVector& moments, int k) {
    if (k < 1) throw std::invalid_argument("number of copies k must be >= 1");
    const std::size_t n = moments.order();
    const DenseMatrix binom = pascal_matrix(n, n);
    std::vector<double> base(moments.values().begin(), moments.values().end());
    std::vector<double> acc = base;
    std::vector<double> next(n + 1);
    for (int copy = 1; copy < k; ++copy) {
        for (std::size_t r = 0; r <= n; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i <= r; ++i) s += binom(r, i) * acc[i] * base[r - i];
            if (!std::isfinite(s)) throw std::runtime_error("moment overflow; reduce N or k");
            next[r] = s;
        }
        acc.swap(next);
    }
    return MomentVector(std::move(acc));
}

double sum_atom(double q, int k) {
    if (k < 1) throw std::invalid_argument("number of copies k must be >= 1");
    return std::pow(q, k);
}

}  // namespace gwlimit
