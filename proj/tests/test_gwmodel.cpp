#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gwlimit/gwmodel.hpp"
#include "oracles.hpp"

using gwlimit::Pgf;
using gwlimit::TruncatedSeries;

namespace {

const std::vector<double> kP1{0.0, 0.3, 0.4, 0.2, 0.1};
const std::vector<double> kP2{0.0, 0.5, 0.0, 0.3, 0.2};
const std::vector<double> kP3(10, 0.1);
const std::vector<double> kP4{0.1, 0.5, 0.0, 0.2, 0.1, 0.1};
const std::vector<double> kCrane{0.1538, 0.6491, 0.1971};
const std::vector<double> kRobin{0.1036, 0.3551, 0.3448, 0.1553, 0.0366, 0.0044, 0.0002};

TruncatedSeries alternating(std::size_t order, double ratio) {
    TruncatedSeries s(order);
    double v = 1.0;
    for (std::size_t j = 0; j <= order; ++j, v *= -ratio) s[j] = v;
    return s;
}

}  // namespace

TEST_CASE("pgf validation") {
    CHECK_NOTHROW(Pgf::polynomial({0.5, 0.5}));
    CHECK_THROWS_AS(Pgf::polynomial({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(Pgf::polynomial({1.2, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(Pgf::polynomial({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Pgf::linear_fractional(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Pgf::linear_fractional(0.6, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Pgf::linear_fractional(0.0, 0.5), std::invalid_argument);
    CHECK_NOTHROW(Pgf::substochastic({0.2, 0.3}));
}

TEST_CASE("mean") {
    CHECK(gwlimit::mean(Pgf::polynomial(kP3)) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(gwlimit::mean(Pgf::linear_fractional(0.5, 0.5)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(gwlimit::mean(Pgf::polynomial(kCrane)) - 1.04) < 5e-3);
    CHECK(std::abs(gwlimit::mean(Pgf::polynomial(kRobin)) - 1.68) < 5e-3);
}

TEST_CASE("extinction probability") {
    CHECK(gwlimit::extinction_probability(Pgf::polynomial(kP1)) == 0.0);
    CHECK(std::abs(gwlimit::extinction_probability(Pgf::polynomial(kCrane)) - 0.7803) < 1e-4);
    CHECK(std::abs(gwlimit::extinction_probability(Pgf::polynomial(kRobin)) - 0.1793) < 1e-4);
    CHECK_THROWS_WITH_AS(gwlimit::extinction_probability(Pgf::polynomial({0.5, 0.0, 0.5})), "mean offspring <= 1",
                         std::domain_error);
}

TEST_CASE("extinction probability is the smallest fixed point") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const Pgf pgf = Pgf::polynomial(oracle::random_pgf(3 + trial % 8, 1.1 + 0.05 * trial, rng));
        const double q = gwlimit::extinction_probability(pgf);
        CHECK(std::abs(pgf.value(q) - q) <= 1e-12);
        for (int k = 0; k < 1000; ++k) {
            const double x = q * double(k) / 1000.0;
            CHECK(pgf.value(x) > x);
        }
    }
}

TEST_CASE("alpha") {
    CHECK(gwlimit::alpha(Pgf::polynomial(kP1)) == doctest::Approx(-std::log(0.3) / std::log(2.1) - 1.0).epsilon(1e-13));
    CHECK(gwlimit::alpha(Pgf::polynomial(kP1)) == doctest::Approx(0.6227).epsilon(1e-4));
    CHECK(gwlimit::alpha(Pgf::polynomial(kP2)) == doctest::Approx(-0.121).epsilon(1e-3));
    CHECK(gwlimit::alpha(Pgf::polynomial(kP3)) > 0.0);
    CHECK(gwlimit::alpha(Pgf::polynomial(kP4)) < 0.0);
    for (double c : {0.3, 0.5, 0.7, 0.9}) CHECK(std::abs(gwlimit::alpha(Pgf::linear_fractional(1.0 - c, c))) <= 1e-14);
    CHECK_THROWS_WITH_AS(gwlimit::alpha(Pgf::polynomial({0.0, 0.0, 1.0})),
                         "alpha is +infinity; density vanishes faster than any power", std::domain_error);
    const auto inv = gwlimit::invariants(Pgf::polynomial(kRobin));
    CHECK(inv.alpha > -1.0);
    CHECK(inv.pprime_q == doctest::Approx(Pgf::polynomial(kRobin).derivative(inv.q)));
}

TEST_CASE("pgf_apply_series") {
    const TruncatedSeries s{1.0, -0.5, 0.25, 0.125};
    CHECK(gwlimit::pgf_apply_series(Pgf::polynomial({0.0, 1.0}), s) == s);
    CHECK(gwlimit::pgf_apply_series(Pgf::polynomial({0.0, 0.0, 1.0}), TruncatedSeries{1.0, -1.0, 0.0}) ==
          TruncatedSeries{1.0, -2.0, 1.0});

    // P(1/(1+z)) = 1/(1+mz) for b = 1-c, m = 1/(1-c).
    const double c = 0.7;
    const auto r = gwlimit::pgf_apply_series(Pgf::linear_fractional(1.0 - c, c), alternating(20, 1.0));
    const auto expected = alternating(20, 1.0 / (1.0 - c));
    for (std::size_t j = 0; j <= 20; ++j) CHECK(r[j] == doctest::Approx(expected[j]).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(gwlimit::pgf_apply_series(Pgf::linear_fractional(0.25, 0.5), TruncatedSeries{2.0, 0.0}),
                         "singular rational composition", std::domain_error);
}

TEST_CASE("linear-fractional composition matches its truncation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double c : {0.2, 0.5}) {
        const auto lf = gwlimit::LinearFractional{1.0 - c, c};
        const std::size_t order = 30;
        // Keep far more terms than the series order so the dropped tail is below rounding.
        const auto trunc = gwlimit::truncate_to_polynomial(lf, 200);
        for (int trial = 0; trial < 10; ++trial) {
            TruncatedSeries s(order);
            s[0] = 0.3 * unif(rng);
            for (std::size_t j = 1; j <= order; ++j) s[j] = unif(rng);
            const auto a = gwlimit::pgf_apply_series(Pgf::linear_fractional(lf.b, lf.c), s);
            const auto b = gwlimit::pgf_apply_series(trunc.pgf, s);
            for (std::size_t j = 0; j <= order; ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-10 * std::max(1.0, std::abs(a[j])));
        }
    }
}

TEST_CASE("pgf_derivative_apply_series") {
    CHECK(gwlimit::pgf_derivative_apply_series(Pgf::polynomial({0.0, 0.0, 1.0}), TruncatedSeries{1.0, -1.0}) ==
          TruncatedSeries{2.0, -2.0});
    const TruncatedSeries s{1.0, -1.0, 0.3, 0.1};
    for (const auto& p : {kP1, kP2, kP3, kP4, kCrane, kRobin}) {
        const Pgf pgf = Pgf::polynomial(p);
        CHECK(gwlimit::pgf_derivative_apply_series(pgf, s)[0] == doctest::Approx(gwlimit::mean(pgf)).epsilon(1e-14));
    }
    CHECK(gwlimit::pgf_derivative_apply_series(Pgf::polynomial(kP1), TruncatedSeries{1.0, -1.0})[0] ==
          doctest::Approx(2.1).epsilon(1e-14));
    const Pgf lf = Pgf::linear_fractional(0.3, 0.7);
    CHECK(gwlimit::pgf_derivative_apply_series(lf, s)[0] == doctest::Approx(gwlimit::mean(lf)).epsilon(1e-13));

    TruncatedSeries constant(std::size_t{6});
    constant[0] = 0.4;
    const auto d = gwlimit::pgf_derivative_apply_series(lf, constant);
    CHECK(d[0] == doctest::Approx(lf.derivative(0.4)).epsilon(1e-14));
    for (std::size_t j = 1; j <= 6; ++j) CHECK(d[j] == 0.0);
}

TEST_CASE("truncate_to_polynomial") {
    const auto t = gwlimit::truncate_to_polynomial({0.5, 0.5}, 3);
    CHECK(t.pgf.as_polynomial().p == std::vector<double>{0.0, 0.5, 0.25});
    CHECK(t.deficit == doctest::Approx(0.25).epsilon(1e-15));
    const auto t80 = gwlimit::truncate_to_polynomial({0.3, 0.7}, 80);
    CHECK(t80.deficit == doctest::Approx(std::pow(0.7, 79)).epsilon(1e-12));
    // 1 - c is inexact in binary, so p_0 = 1 - b / (1 - c) is only zero to rounding.
    CHECK(std::abs(t80.pgf.as_polynomial().p[0]) <= 1e-15);
}
