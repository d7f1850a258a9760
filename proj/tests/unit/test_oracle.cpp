#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "thermopath/errors.hpp"
#include "thermopath/oracle.hpp"

using namespace thermo;

TEST_CASE("exact_log_lambda") {
    CHECK(exact_log_lambda(GaussianPair::univariate(0, 1, 1, 1)) == doctest::Approx(0.0));
    CHECK(exact_log_lambda(GaussianPair::univariate(0, 1, 0, 1, 1.0, 2.0)) == doctest::Approx(std::log(2.0)));
    CHECK(exact_log_lambda(GaussianPair::univariate(0, 1, 0, 4)) == doctest::Approx(0.5 * std::log(4.0)));
}

TEST_CASE("exact E_t and V_t") {
    const auto pair = GaussianPair::univariate(0, 1, 1, 1);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        CHECK(exact_e_t(pair, t) == doctest::Approx((2 * t - 1) / 2));
        CHECK(exact_v_t(pair, t) == doctest::Approx(1.0));
    }
    const auto same = GaussianPair::univariate(0.3, 2, 0.3, 2);
    CHECK(exact_e_t(same, 0.4) == doctest::Approx(0.0));
    CHECK(exact_v_t(same, 0.4) == doctest::Approx(0.0));
}

TEST_CASE("E_t derivative equals V_t") {
    const GaussianPair pair{{0.0, 1.0}, {1.0, -0.5}, {1.0, 0.3, 0.3, 2.0}, {1.0, 0.3, 0.3, 2.0}, 1.0, 3.0};
    const GaussianPair unequal = GaussianPair::univariate(0, 1, 2, 3);
    for (const auto& p : {pair, unequal}) {
        for (double t : {0.1, 0.4, 0.8}) {
            const double h = 1e-4;
            const double fd = (exact_e_t(p, t + h) - exact_e_t(p, t - h)) / (2 * h);
            CHECK(fd == doctest::Approx(exact_v_t(p, t)).epsilon(1e-6));
        }
    }
}

TEST_CASE("exact divergences") {
    const auto d = exact_divergences(GaussianPair::univariate(0, 1, 1, 1));
    CHECK(d.kl_1_0 == doctest::Approx(0.5));
    CHECK(d.kl_0_1 == doctest::Approx(0.5));
    CHECK(d.j == doctest::Approx(1.0));
    CHECK(d.t_star == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(d.chernoff_info == doctest::Approx(0.125));
    CHECK(d.bhattacharyya == doctest::Approx(0.125));
    CHECK(d.hellinger == doctest::Approx(std::sqrt(1 - std::exp(-0.125))));

    const auto same = exact_divergences(GaussianPair::univariate(1, 2, 1, 2));
    CHECK(same.kl_1_0 == doctest::Approx(0.0));
    CHECK(same.kl_0_1 == doctest::Approx(0.0));
    CHECK(same.chernoff_info == doctest::Approx(0.0));
    CHECK(same.hellinger == doctest::Approx(0.0));

    // listed as (p1, p0): p1 = N(0, 1), p0 = N(0, 4)
    const auto wide = exact_divergences(GaussianPair::univariate(0, 4, 0, 1));
    CHECK(wide.kl_1_0 == doctest::Approx(0.3181).epsilon(1e-4));
    CHECK(wide.kl_0_1 == doctest::Approx(0.8069).epsilon(1e-4));
}

TEST_CASE("log mu balance and profile minimum") {
    for (const auto& p : {GaussianPair::univariate(0, 1, 1, 1), GaussianPair::univariate(0, 1, 2, 3, 1, 7)}) {
        CHECK(std::abs(exact_log_mu(p, 0.0)) < 1e-8);
        CHECK(std::abs(exact_log_mu(p, 1.0)) < 1e-8);
        const auto d = exact_divergences(p);
        CHECK(-exact_log_mu(p, d.t_star) == doctest::Approx(d.chernoff_info));
        for (double t : {0.05, 0.3, 0.6, 0.95}) CHECK(exact_log_mu(p, t) >= exact_log_mu(p, d.t_star) - 1e-12);
    }
}

TEST_CASE("quadrature_log_z examples") {
    const QuadratureGrid grid;
    CHECK(quadrature_log_z([](double x) { return -0.5 * x * x; }, grid) ==
          doctest::Approx(0.5 * std::log(2 * M_PI)).epsilon(1e-6));
    CHECK(std::abs(quadrature_log_z([](double x) { return -std::abs(x); }, {-20, 20, 1e-3}) - std::log(2.0)) < 1e-6);
    const double base = quadrature_log_z([](double x) { return -0.5 * x * x; }, grid);
    const double scaled = quadrature_log_z([](double x) { return std::log(3.0) - 0.5 * x * x; }, grid);
    CHECK(scaled - base == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(quadrature_log_z([](double x) { return -0.01 * x * x; }, grid), GridError);
    CHECK_THROWS_AS(quadrature_log_z([](double x) { return -0.5 * x * x; }, {-4, 4, 1e-3}), GridError);
}

TEST_CASE("quadrature along the geometric path reproduces log mu and t*") {
    const auto pair = GaussianPair::univariate(0, 1, 1.5, 2, 1.0, 2.5);
    const Path path(pair.path());
    const QuadratureGrid grid{-15, 15, 1e-3};
    const double z0 = quadrature_log_z(path, 0.0, grid);
    const double ll = exact_log_lambda(pair);
    for (double t : {0.2, 0.5, 0.9}) {
        CHECK(quadrature_log_z(path, t, grid) - z0 == doctest::Approx(exact_log_mu(pair, t) + t * ll).epsilon(1e-8));
    }
    const double t_grid = golden_section_min(
        [&](double t) { return quadrature_log_z(path, t, grid) - z0 - t * ll; }, 0, 1, 1e-6);
    CHECK(t_grid == doctest::Approx(exact_divergences(pair).t_star).epsilon(1e-4));
}

TEST_CASE("profile-based divergences agree with the closed form") {
    const auto pair = GaussianPair::univariate(0, 1, 1, 2);
    const auto exact = exact_divergences(pair);
    const auto prof = divergences_from_profile(
        [&](double t) { return exact_log_mu(pair, t) + t * exact_log_lambda(pair); },
        [&](double t) { return exact_e_t(pair, t); });
    CHECK(prof.kl_1_0 == doctest::Approx(exact.kl_1_0));
    CHECK(prof.kl_0_1 == doctest::Approx(exact.kl_0_1));
    CHECK(prof.t_star == doctest::Approx(exact.t_star).epsilon(1e-6));
    CHECK(prof.chernoff_info == doctest::Approx(exact.chernoff_info));
    CHECK(prof.hellinger == doctest::Approx(exact.hellinger));
}

TEST_CASE("invalid pairs are rejected") {
    CHECK_THROWS_AS(GaussianPair::univariate(0, -1, 0, 1).validate(), DomainError);
    GaussianPair p{{0.0, 0.0}, {0.0, 0.0}, {1.0, 2.0, 2.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(p.validate(), DomainError);
}
