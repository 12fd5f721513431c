#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gwlimit/poincare.hpp"
#include "oracles.hpp"

using gwlimit::Method;
using gwlimit::Pgf;
using gwlimit::SolverConfig;
using gwlimit::TruncatedSeries;

namespace {

const std::vector<double> kP1{0.0, 0.3, 0.4, 0.2, 0.1};
const std::vector<double> kP2{0.0, 0.5, 0.0, 0.3, 0.2};
const std::vector<double> kP3(10, 0.1);
const std::vector<double> kP4{0.1, 0.5, 0.0, 0.2, 0.1, 0.1};

TruncatedSeries exp_neg(std::size_t order) {
    TruncatedSeries s(order);
    double f = 1.0;
    for (std::size_t j = 0; j <= order; ++j) {
        if (j > 0) f *= double(j);
        s[j] = (j % 2 == 0 ? 1.0 : -1.0) / f;
    }
    return s;
}

double max_rel_error(const TruncatedSeries& got, const TruncatedSeries& want) {
    double worst = 0.0;
    for (std::size_t j = 0; j < want.size(); ++j) worst = std::max(worst, std::abs(got[j] / want[j] - 1.0));
    return worst;
}

SolverConfig order(std::size_t n) {
    SolverConfig cfg;
    cfg.order = n;
    return cfg;
}

}  // namespace

TEST_CASE("method names") {
    for (Method m : {Method::Forward, Method::FixedPoint, Method::Newton}) CHECK(gwlimit::parse_method(gwlimit::to_string(m)) == m);
    CHECK_THROWS_AS(gwlimit::parse_method("bisection"), std::invalid_argument);
}

TEST_CASE("residual examples") {
    const Pgf square = Pgf::polynomial({0.0, 0.0, 1.0});
    CHECK(gwlimit::residual(exp_neg(20), square) < 1e-13);
    CHECK(gwlimit::residual(TruncatedSeries{1.0, -1.0, 0.0}, square) == doctest::Approx(1.0));
    SolverConfig cfg = order(100);
    const auto report = gwlimit::solve_newton(Pgf::polynomial(kP3), cfg);
    CHECK(gwlimit::residual(report.phi, Pgf::polynomial(kP3)) <= 1e-14);
    CHECK(report.final_residual == gwlimit::residual(report.phi, Pgf::polynomial(kP3)));
}

TEST_CASE("forward substitution examples") {
    const auto quad = gwlimit::solve_forward(Pgf::polynomial({0.0, 0.5, 0.5}), order(2));
    CHECK(quad.phi[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto lf = gwlimit::solve_forward(Pgf::linear_fractional(0.1, 0.9), order(80));
    for (std::size_t i = 0; i <= 80; ++i) CHECK(std::abs(lf.phi[i] - ((i % 2 == 0) ? 1.0 : -1.0)) <= 1e-10);
    CHECK(lf.converged);

    for (int d : {2, 3, 4, 7}) {
        std::vector<double> p(d + 1, 0.0);
        p[d] = 1.0;
        CHECK(max_rel_error(gwlimit::solve_forward(Pgf::polynomial(p), order(20)).phi, exp_neg(20)) <= 1e-13);
    }
}

TEST_CASE("quadratic law closed form for phi_2") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double p2 = 0.2 + 0.8 * unif(rng);
        const double p0 = (1.0 - p2) * 0.5 * unif(rng);
        const Pgf pgf = Pgf::polynomial({p0, 1.0 - p0 - p2, p2});
        const double m = gwlimit::mean(pgf);
        if (m <= 1.05) continue;
        for (Method method : {Method::Forward, Method::FixedPoint, Method::Newton}) {
            SolverConfig cfg = order(10);
            cfg.tol = 1e-14;
            const auto report = gwlimit::solve(pgf, method, cfg);
            CHECK(report.phi[2] == doctest::Approx(p2 / (m * m - m)).epsilon(1e-13));
        }
    }
}

TEST_CASE("fixed point iteration") {
    SolverConfig cfg = order(100);
    cfg.tol = 1e-15;
    const auto p3 = gwlimit::solve_fixed_point(Pgf::polynomial(kP3), cfg);
    CHECK(p3.converged);
    // Machine-precision residual after 27 updates, i.e. 28 checks.
    CHECK(p3.iterations >= 26);
    CHECK(p3.iterations <= 30);

    SolverConfig exact = order(30);
    exact.initial = exp_neg(30);
    exact.tol = 1e-13;
    const auto one = gwlimit::solve_fixed_point(Pgf::polynomial({0.0, 0.0, 1.0}), exact);
    CHECK(one.iterations == 1);
    CHECK(one.final_residual < 1e-13);

    SolverConfig capped = order(40);
    capped.max_iters = 3;
    const auto stopped = gwlimit::solve_fixed_point(Pgf::polynomial(kP1), capped);
    CHECK_FALSE(stopped.converged);
    CHECK(stopped.iterations == 3);
    CHECK(stopped.residual_history.size() == 3);
    CHECK(stopped.final_residual == gwlimit::residual(stopped.phi, Pgf::polynomial(kP1)));
}

TEST_CASE("fixed point contraction rate is 1/m") {
    for (const auto& p : {kP1, kP2, kP3, kP4}) {
        const Pgf pgf = Pgf::polynomial(p);
        SolverConfig cfg = order(80);
        cfg.tol = 1e-15;
        cfg.max_iters = 2000;
        const auto report = gwlimit::solve_fixed_point(pgf, cfg);
        std::vector<double> ratios;
        const auto& h = report.residual_history;
        for (std::size_t k = 0; k + 1 < h.size(); ++k)
            if (h[k] < 1e-3 && h[k + 1] > 1e-11) ratios.push_back(h[k + 1] / h[k]);
        REQUIRE(ratios.size() >= 3);
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        const double median = ratios[ratios.size() / 2];
        CHECK(std::abs(median * gwlimit::mean(pgf) - 1.0) <= 0.1);
    }
}

TEST_CASE("newton") {
    SolverConfig cfg = order(100);
    const auto report = gwlimit::solve_newton(Pgf::polynomial(kP3), cfg);
    CHECK(report.converged);
    CHECK(report.iterations <= 6);

    SolverConfig fixed_cfg = order(100);
    fixed_cfg.tol = 1e-15;
    const auto fixed = gwlimit::solve_fixed_point(Pgf::polynomial(kP3), fixed_cfg);
    CHECK(max_rel_error(report.phi, fixed.phi) <= 1e-14);

    // The final step at least roughly squares the residual.
    const auto& h = report.residual_history;
    REQUIRE(h.size() >= 2);
    REQUIRE(h[h.size() - 2] < 0.1);
    CHECK(std::log(h.back()) / std::log(h[h.size() - 2]) >= 1.8);
}

TEST_CASE("newton on a linear-fractional law warns about truncation") {
    SolverConfig cfg = order(79);
    const auto report = gwlimit::solve_newton(Pgf::linear_fractional(0.1, 0.9), cfg);
    CHECK(report.warnings.size() == 1);
    CHECK_FALSE(report.converged);
    CHECK(report.final_residual > 1e-6);
}

TEST_CASE("all solvers agree and reproduce e^{-z} for z^d") {
    for (int d : {2, 3, 5}) {
        std::vector<double> p(d + 1, 0.0);
        p[d] = 1.0;
        for (Method method : {Method::Forward, Method::FixedPoint, Method::Newton}) {
            SolverConfig cfg = order(40);
            cfg.tol = 1e-14;
            CHECK(max_rel_error(gwlimit::solve(Pgf::polynomial(p), method, cfg).phi, exp_neg(40)) <= 1e-12);
        }
    }
    std::mt19937_64 rng(23);
    std::vector<std::vector<double>> laws{kP1, kP2, kP3, kP4};
    for (int k = 0; k < 6; ++k) laws.push_back(oracle::random_pgf(4 + k, 1.25 + 0.3 * k, rng));
    for (const auto& p : laws) {
        const Pgf pgf = Pgf::polynomial(p);
        SolverConfig cfg = order(80);
        cfg.tol = 1e-14;
        const auto fwd = gwlimit::solve_forward(pgf, cfg);
        const auto newton = gwlimit::solve_newton(pgf, cfg);
        cfg.tol = 1e-15;
        cfg.max_iters = 5000;
        const auto fixed = gwlimit::solve_fixed_point(pgf, cfg);
        CHECK(max_rel_error(fwd.phi, newton.phi) <= 1e-10);
        CHECK(max_rel_error(fixed.phi, newton.phi) <= 1e-10);
    }
}

TEST_CASE("jacobian diagonal term is the mean") {
    const Pgf pgf = Pgf::polynomial(kP4);
    const auto report = gwlimit::solve_newton(pgf, order(40));
    CHECK(gwlimit::pgf_derivative_apply_series(pgf, report.phi)[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("solver input validation") {
    const Pgf pgf = Pgf::polynomial(kP1);
    SolverConfig bad = order(1);
    CHECK_THROWS_AS(gwlimit::solve_newton(pgf, bad), std::invalid_argument);
    SolverConfig bad_tol = order(10);
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(gwlimit::solve_fixed_point(pgf, bad_tol), std::invalid_argument);
    SolverConfig bad_init = order(10);
    bad_init.initial = TruncatedSeries{1.0, -0.5};
    CHECK_THROWS_AS(gwlimit::solve_newton(pgf, bad_init), std::invalid_argument);
    CHECK_THROWS_AS(gwlimit::solve_forward(Pgf::polynomial({0.5, 0.0, 0.5}), order(10)), std::domain_error);
}
