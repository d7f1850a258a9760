#include "thermopath/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "conjugate_plan.hpp"
#include "thermopath/errors.hpp"

namespace thermo {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat to_matrix(const std::vector<double>& cov, std::size_t d) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

Vec to_vector(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

double log_det_spd(const Mat& m) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) throw DomainError("oracle", "matrix is not positive definite");
    return 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
}

struct Tempered {
    Mat lambda0, lambda1, cov;  // cov of p_t
    Vec mean;                   // mean of p_t
    Vec h;
    double k;
};

Tempered tempered(const GaussianPair& pair, double t) {
    pair.validate();
    check_temperature(t, "oracle");
    const auto d = pair.dim();
    Tempered r;
    r.lambda0 = to_matrix(pair.cov0, d).inverse();
    r.lambda1 = to_matrix(pair.cov1, d).inverse();
    const Vec m0 = to_vector(pair.mean0), m1 = to_vector(pair.mean1);
    const Mat lambda = t * r.lambda1 + (1.0 - t) * r.lambda0;
    Eigen::LLT<Mat> llt(lambda);
    if (llt.info() != Eigen::Success) throw DomainError("oracle", "tempered precision is not positive definite");
    r.cov = llt.solve(Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    r.h = t * r.lambda1 * m1 + (1.0 - t) * r.lambda0 * m0;
    r.mean = r.cov * r.h;
    r.k = t * m1.dot(r.lambda1 * m1) + (1.0 - t) * m0.dot(r.lambda0 * m0);
    return r;
}

}  // namespace

GaussianPair GaussianPair::univariate(double mean0, double var0, double mean1, double var1, double c0, double c1) {
    GaussianPair p{{mean0}, {mean1}, {var0}, {var1}, c0, c1};
    p.validate();
    return p;
}

void GaussianPair::validate() const {
    const auto d = mean0.size();
    if (d == 0 || mean1.size() != d || cov0.size() != d * d || cov1.size() != d * d) {
        throw ArgumentError("oracle", "Gaussian pair: inconsistent dimensions");
    }
    if (!(c0 > 0) || !(c1 > 0)) throw DomainError("oracle", "Gaussian pair: scale constants must be positive");
    for (const auto* cov : {&cov0, &cov1}) {
        const Mat m = to_matrix(*cov, d);
        if (!m.isApprox(m.transpose())) throw DomainError("oracle", "Gaussian pair: covariance not symmetric");
        log_det_spd(m);
    }
}

GeometricPath GaussianPair::path() const {
    validate();
    return {gaussian_kernel(mean0, cov0, c0, "q0"), gaussian_kernel(mean1, cov1, c1, "q1")};
}

double exact_log_lambda(const GaussianPair& pair) {
    pair.validate();
    const auto d = pair.dim();
    return std::log(pair.c1 / pair.c0) + 0.5 * (log_det_spd(to_matrix(pair.cov1, d)) - log_det_spd(to_matrix(pair.cov0, d)));
}

double exact_log_mu(const GaussianPair& pair, double t) {
    const auto r = tempered(pair, t);
    const double quad = r.h.dot(r.mean);
    return 0.5 * quad - 0.5 * r.k +
           0.5 * (t * log_det_spd(r.lambda1) + (1.0 - t) * log_det_spd(r.lambda0) - log_det_spd(r.cov.inverse()));
}

namespace {

// U(x) = const + x'Ax + b'x
struct UQuadratic {
    Mat a;
    Vec b;
    double c;
};

UQuadratic u_quadratic(const GaussianPair& pair, const Tempered& r) {
    const Vec m0 = to_vector(pair.mean0), m1 = to_vector(pair.mean1);
    return {-0.5 * (r.lambda1 - r.lambda0), r.lambda1 * m1 - r.lambda0 * m0,
            std::log(pair.c1 / pair.c0) - 0.5 * m1.dot(r.lambda1 * m1) + 0.5 * m0.dot(r.lambda0 * m0)};
}

}  // namespace

double exact_e_t(const GaussianPair& pair, double t) {
    const auto r = tempered(pair, t);
    const auto u = u_quadratic(pair, r);
    return u.c + (u.a * r.cov).trace() + r.mean.dot(u.a * r.mean) + u.b.dot(r.mean);
}

double exact_v_t(const GaussianPair& pair, double t) {
    const auto r = tempered(pair, t);
    const auto u = u_quadratic(pair, r);
    const Mat as = u.a * r.cov;
    const Vec g = 2.0 * u.a * r.mean + u.b;
    return std::max(0.0, 2.0 * (as * as).trace() + g.dot(r.cov * g));
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

ExactDivergences divergences_from_profile(const std::function<double(double)>& log_z,
                                          const std::function<double(double)>& e_t) {
    const double z0 = log_z(0.0), z1 = log_z(1.0);
    auto log_mu = [&](double t) { return log_z(t) - t * z1 - (1.0 - t) * z0; };
    ExactDivergences r;
    r.log_lambda = z1 - z0;
    r.kl_1_0 = e_t(1.0) - r.log_lambda;
    r.kl_0_1 = r.log_lambda - e_t(0.0);
    r.j = r.kl_1_0 + r.kl_0_1;
    r.bhattacharyya = -log_mu(0.5);
    r.hellinger = std::sqrt(std::max(0.0, 1.0 - std::exp(-r.bhattacharyya)));
    r.t_star = golden_section_min(log_mu, 0.0, 1.0);
    r.chernoff_info = -log_mu(r.t_star);
    r.renyi_at_t_star = r.chernoff_info / (1.0 - r.t_star);
    r.tsallis_at_t_star = -std::expm1(-r.chernoff_info) / (1.0 - r.t_star);
    return r;
}

ExactDivergences exact_divergences(const GaussianPair& pair) {
    const double log_lambda = exact_log_lambda(pair);
    // log z_t = log mu(t) + t log z1 + (1 - t) log z0, with log z0 taken as 0.
    return divergences_from_profile([&](double t) { return exact_log_mu(pair, t) + t * log_lambda; },
                                    [&](double t) { return exact_e_t(pair, t); });
}

double quadrature_log_z(const std::function<double(double)>& log_f, const QuadratureGrid& grid) {
    if (!(grid.hi > grid.lo) || !(grid.step > 0)) throw ArgumentError("oracle", "invalid quadrature grid");
    const auto n = static_cast<std::size_t>(std::ceil((grid.hi - grid.lo) / grid.step));
    const double h = (grid.hi - grid.lo) / static_cast<double>(n);
    std::vector<double> v(n + 1);
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i) {
        v[i] = log_f(grid.lo + h * static_cast<double>(i));
        if (std::isnan(v[i])) throw NumericError("oracle", "NaN in quadrature integrand");
        max = std::max(max, v[i]);
    }
    if (!std::isfinite(max)) throw GridError("oracle", "integrand vanishes on the whole grid");
    if (v.front() > max - grid.boundary_drop || v.back() > max - grid.boundary_drop) {
        throw GridError("oracle", "density not contained in [" + std::to_string(grid.lo) + ", " +
                                      std::to_string(grid.hi) + "]");
    }
    double sum = 0;
    for (std::size_t i = 0; i <= n; ++i) sum += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(v[i] - max);
    return max + std::log(sum * h);
}

double quadrature_log_z(const LogDensity& density, const QuadratureGrid& grid) {
    if (density.dim() != 1) throw ArgumentError("oracle", "quadrature needs a one-dimensional density");
    return quadrature_log_z([&](double x) { return density(std::span<const double>(&x, 1)); }, grid);
}

double quadrature_log_z(const Path& path, double t, const QuadratureGrid& grid) {
    if (path.dim() != 1) throw ArgumentError("oracle", "quadrature needs a one-dimensional path");
    check_temperature(t, "oracle");
    return quadrature_log_z([&](double x) { return path.log_q(std::span<const double>(&x, 1), t); }, grid);
}

double regression_log_z(const Path& path, double t) {
    check_temperature(t, "oracle");
    const GibbsPlan plan = build_plan(path, t);
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    const QuadratureGrid grid{-30.0, 250.0, 0.01};

    // The coordinate groups (regression blocks, free normals, free scales) are
    // independent under p_t, so log z_t is log q_t at a reference point plus
    // one log-integral per group with the other groups held fixed.
    std::vector<double> ref(path.dim(), 0.0);
    auto block_mode = [](const RegressionBlock& b, double s2, std::vector<double>& theta) {
        const auto g = block_gaussian(b, s2);
        const double det = g.p11 * g.p22 - g.p12 * g.p12;
        theta[b.offset] = (g.p22 * g.h1 - g.p12 * g.h2) / det;
        theta[b.offset + 1] = (g.p11 * g.h2 - g.p12 * g.h1) / det;
        theta[b.offset + 2] = s2;
        return det;
    };
    for (const auto& b : plan.blocks) block_mode(b, 1.0, ref);
    for (const auto& n : plan.normals) ref[n.coord] = n.linear / n.precision;
    for (const auto& s : plan.scales) ref[s.coord] = 1.0;
    const double log_ref = path.log_q(ref, t);
    if (!std::isfinite(log_ref)) throw NumericError("oracle", "reference point outside the support", ref);

    double log_z = log_ref;
    std::vector<double> theta;
    for (const auto& n : plan.normals) log_z += 0.5 * (log_2pi - std::log(n.precision));
    for (const auto& s : plan.scales) {
        log_z += quadrature_log_z(
            [&](double ell) {
                theta = ref;
                theta[s.coord] = std::exp(ell);
                return path.log_q(theta, t) - log_ref + ell;
            },
            grid);
    }
    for (const auto& b : plan.blocks) {
        log_z += quadrature_log_z(
            [&](double ell) {
                theta = ref;
                const double det = block_mode(b, std::exp(ell), theta);
                // log q_t is quadratic in (alpha, beta): exact Gaussian integral at the maximiser
                return path.log_q(theta, t) - log_ref + log_2pi - 0.5 * std::log(det) + ell;
            },
            grid);
    }
    return log_z;
}

double regression_e_t(const Path& path, double t, double h) {
    check_temperature(t, "oracle");
    auto f = [&](double s) { return regression_log_z(path, s); };
    if (t - h < 0.0) return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
    if (t + h > 1.0) return (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2.0 * h)) / (2.0 * h);
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace thermo
