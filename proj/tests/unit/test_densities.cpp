#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "thermopath/densities.hpp"
#include "thermopath/errors.hpp"

using namespace thermo;

namespace {

LogDensity kernel(double mean, double scale = 1.0) { return gaussian_kernel({mean}, {1.0}, scale); }

GeometricPath unit_pair() { return {kernel(0.0), kernel(1.0)}; }

// Four unrelated 2-D densities so that every weight matters.
QuadrivialPath random_quadrivial() {
    return {normal_diag({0.3, -1.0}, {1.5, 0.7}), normal_diag({-0.2, 0.4}, {2.0, 1.1}, 0.3),
            gaussian_kernel({1.0, 0.0}, {1.0, 0.2, 0.2, 0.5}, 2.0), normal_diag({0.0, 2.0}, {0.4, 3.0})};
}

}  // namespace

TEST_CASE("geometric_log_q endpoints and midpoint") {
    const auto path = unit_pair();
    const std::vector<double> theta{0.5};
    CHECK(geometric_log_q(path, theta, 0.0) == doctest::Approx(path.q0(theta)));
    CHECK(geometric_log_q(path, theta, 1.0) == doctest::Approx(path.q1(theta)));
    CHECK(geometric_log_q(path, theta, 0.5) == doctest::Approx(-0.125).epsilon(1e-14));
}

TEST_CASE("u_statistic hand values") {
    const std::vector<double> zero{0.0}, half{0.5};
    CHECK(u_statistic({kernel(0.0), kernel(0.0)}, zero) == 0.0);
    CHECK(u_statistic({kernel(0.0), kernel(1.0, 2.0)}, zero) == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
    CHECK(u_statistic(unit_pair(), half) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("geometric path is log-linear in t and U is its t-derivative") {
    const GeometricPath path{normal_diag({0.0, 1.0}, {1.0, 2.0}), gaussian_kernel({1.0, -1.0}, {2.0, 0.3, 0.3, 1.0}, 5.0)};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int rep = 0; rep < 200; ++rep) {
        const std::vector<double> theta{z(rng), z(rng)};
        const double t = unif(rng);
        const double lin = (1 - t) * geometric_log_q(path, theta, 0) + t * geometric_log_q(path, theta, 1);
        CHECK(geometric_log_q(path, theta, t) == doctest::Approx(lin).epsilon(1e-12));
        const double h = 1e-5;
        const double fd = (geometric_log_q(path, theta, t + h) - geometric_log_q(path, theta, t - h)) / (2 * h);
        CHECK(std::abs(fd - u_statistic(path, theta)) < 1e-8);
        CHECK(u_statistic({path.q1, path.q0}, theta) == doctest::Approx(-u_statistic(path, theta)));
    }
}

TEST_CASE("zero-weighted endpoint is skipped at t in {0, 1}") {
    const auto positive = inverse_gamma(2.0, 1.0);
    const GeometricPath path{normal_diag({0.0}, {1.0}), positive};
    const std::vector<double> negative{-1.0};
    CHECK(std::isfinite(geometric_log_q(path, negative, 0.0)));
    CHECK(geometric_log_q(path, negative, 0.5) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(u_statistic(path, negative), SupportError);
}

TEST_CASE("quadrivial endpoints, midpoint and degenerate case") {
    const auto path = random_quadrivial();
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> theta{z(rng), z(rng)};
        CHECK(quadrivial_log_q(path, theta, 1.0) == path.q1_of_1(theta));
        CHECK(quadrivial_log_q(path, theta, 0.0) == path.q0_of_0(theta));
        const double mean = 0.25 * (path.q1_of_1(theta) + path.q0_of_1(theta) + path.q1_of_0(theta) +
                                    path.q0_of_0(theta));
        CHECK(quadrivial_log_q(path, theta, 0.5) == doctest::Approx(mean).epsilon(1e-13));
        CHECK(quadrivial_u(path, theta, 0.5) ==
              doctest::Approx(path.q1_of_1(theta) - path.q0_of_0(theta)).epsilon(1e-13));
    }
    const auto q = normal_diag({0.0, 0.0}, {1.0, 1.0});
    const std::vector<double> theta{0.3, -0.2};
    CHECK(quadrivial_u({q, q, q, q}, theta, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("quadrivial_u matches finite differences to 1e-6") {
    const auto path = random_quadrivial();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> unif(0.001, 0.999);
    for (int rep = 0; rep < 500; ++rep) {
        const std::vector<double> theta{z(rng), z(rng)};
        const double t = unif(rng), h = 1e-5;
        const double fd = (quadrivial_log_q(path, theta, t + h) - quadrivial_log_q(path, theta, t - h)) / (2 * h);
        CHECK(std::abs(fd - quadrivial_u(path, theta, t)) < 1e-6);
    }
}

TEST_CASE("Path dispatch agrees with the free functions") {
    const auto quad = random_quadrivial();
    const Path qp(quad), gp(unit_pair());
    const std::vector<double> theta{0.4, -0.3};
    const std::vector<double> x{0.7};
    for (double t : {0.0, 0.2, 0.5, 1.0}) {
        CHECK(qp.log_q(theta, t) == doctest::Approx(quadrivial_log_q(quad, theta, t)));
        CHECK(qp.u(theta, t) == doctest::Approx(quadrivial_u(quad, theta, t)));
        CHECK(gp.log_q(x, t) == doctest::Approx(geometric_log_q(unit_pair(), x, t)));
    }
    std::vector<double> logs(4);
    qp.component_logs(theta, logs);
    CHECK(qp.combine(logs, 0.3) == doctest::Approx(quadrivial_log_q(quad, theta, 0.3)));
    const auto s = gp.swapped();
    CHECK(s.u(x, 0.5) == doctest::Approx(-gp.u(x, 0.5)));
}

TEST_CASE("LogDensity rejects NaN and bad temperatures") {
    const auto bad = LogDensity::custom("nan", 1, [](std::span<const double>) { return std::nan(""); });
    const std::vector<double> x{0.0};
    CHECK_THROWS_AS(bad(x), NumericError);
    CHECK_THROWS_AS(check_temperature(1.5, "test"), DomainError);
    CHECK_THROWS_AS(check_temperature(std::nan(""), "test"), DomainError);
}

TEST_CASE("normal_diag and normal_full are normalised and agree") {
    const auto d = normal_diag({1.0, -2.0}, {2.0, 0.5});
    const auto f = normal_full({1.0, -2.0}, {2.0, 0.0, 0.0, 0.5});
    const std::vector<double> x{0.3, -1.1};
    CHECK(d(x) == doctest::Approx(f(x)).epsilon(1e-13));
    const std::vector<double> m{1.0, -2.0};
    CHECK(d(m) == doctest::Approx(-std::log(2 * M_PI) - 0.5 * std::log(1.0)).epsilon(1e-13));
    CHECK_THROWS_AS(normal_full({0.0, 0.0}, {1.0, 2.0, 2.0, 1.0}), DomainError);
}
