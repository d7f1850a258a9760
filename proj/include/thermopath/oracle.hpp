#pragma once

#include <functional>
#include <vector>

#include "thermopath/densities.hpp"

namespace thermo {

// Two Gaussian kernels q_i(x) = c_i exp(-(x - mean_i)' cov_i^{-1} (x - mean_i) / 2),
// so z_i = c_i (2 pi)^{d/2} |cov_i|^{1/2}. Covariances are row-major d x d.
struct GaussianPair {
    std::vector<double> mean0, mean1;
    std::vector<double> cov0, cov1;
    double c0 = 1.0, c1 = 1.0;

    static GaussianPair univariate(double mean0, double var0, double mean1, double var1, double c0 = 1.0,
                                   double c1 = 1.0);

    std::size_t dim() const { return mean0.size(); }
    // DomainError unless both covariances are symmetric positive definite.
    void validate() const;
    GeometricPath path() const;
};

// Exact values of every divergence the estimators report.
struct ExactDivergences {
    double log_lambda = 0;
    double kl_1_0 = 0, kl_0_1 = 0, j = 0;
    double bhattacharyya = 0, hellinger = 0;
    double t_star = 0.5, chernoff_info = 0;
    double renyi_at_t_star = 0, tsallis_at_t_star = 0;
};

double exact_log_lambda(const GaussianPair& pair);
// Mean and variance of U = log q1 - log q0 under p_t.
double exact_e_t(const GaussianPair& pair, double t);
double exact_v_t(const GaussianPair& pair, double t);
// log of the integral of p1^t p0^{1-t} (normalised endpoints); the Chernoff
// t-divergence is its negation.
double exact_log_mu(const GaussianPair& pair, double t);
ExactDivergences exact_divergences(const GaussianPair& pair);

// Divergences of any path from its log-normaliser profile t -> log z_t and its
// derivative t -> E_t.
ExactDivergences divergences_from_profile(const std::function<double(double)>& log_z,
                                          const std::function<double(double)>& e_t);

// Minimiser of a unimodal function on [lo, hi] by golden-section search.
double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

struct QuadratureGrid {
    double lo = -10, hi = 10, step = 1e-3;
    // Minimum fall of the log-integrand from its maximum to either boundary.
    double boundary_drop = 15;
};

// log of the trapezoid integral of exp(f) over the grid. GridError when f at
// either boundary is less than grid.boundary_drop log-units below the maximum.
double quadrature_log_z(const std::function<double(double)>& log_f, const QuadratureGrid& grid);
double quadrature_log_z(const LogDensity& density, const QuadratureGrid& grid);
// log z_t of a one-dimensional path.
double quadrature_log_z(const Path& path, double t, const QuadratureGrid& grid);

// log z_t of a path whose active components are all conjugate terms (the
// structure the Gibbs sampler accepts): (alpha, beta) and free normal
// coordinates are integrated in closed form, scale coordinates by quadrature
// over their logarithm.
double regression_log_z(const Path& path, double t);
// d/dt log z_t by finite differences of regression_log_z.
double regression_e_t(const Path& path, double t, double h = 1e-4);

}  // namespace thermo
