#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "thermopath/data.hpp"

namespace thermo {

// A finite parameter vector theta.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::vector<double> values);
    ParamVector(std::initializer_list<double> values) : ParamVector(std::vector<double>(values)) {}

    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    operator std::span<const double>() const { return values_; }

private:
    std::vector<double> values_;
};

// Building blocks with a known conjugate structure. A LogDensity made only of
// these can be sampled by the block Gibbs sampler; anything else goes through
// random-walk Metropolis.
struct ConstantTerm {
    double value;
};
// log N(theta_k; mean, var)
struct NormalTerm {
    std::size_t coord;
    double mean, var;
};
// log IG(theta_k; shape, rate)
struct InverseGammaTerm {
    std::size_t coord;
    double shape, rate;
};
// log N(log theta_k; mean, var) - log theta_k, i.e. a proper density on theta_k > 0
struct LogNormalTerm {
    std::size_t coord;
    double mean, var;
};
// log f(y | alpha, beta, sigma2) with (alpha, beta, sigma2) at offset, offset+1, offset+2
struct RegressionLikelihoodTerm {
    std::size_t offset;
    std::shared_ptr<const RegressionData> data;
};

using ConjugateTerm =
    std::variant<ConstantTerm, NormalTerm, InverseGammaTerm, LogNormalTerm, RegressionLikelihoodTerm>;

double evaluate_term(const ConjugateTerm& term, std::span<const double> theta);

// Unnormalised log-density over a fixed-dimension parameter vector. Immutable
// and cheap to copy; evaluation is safe from several threads at once.
// Returns -inf outside the support and never NaN or +inf (NumericError).
class LogDensity {
public:
    using Fn = std::function<double(std::span<const double>)>;
    using SupportFn = std::function<bool(std::span<const double>)>;

    LogDensity() = default;

    static LogDensity custom(std::string label, std::size_t dim, Fn fn,
                             std::vector<std::size_t> positive_coords = {}, SupportFn support = {});
    static LogDensity from_terms(std::string label, std::size_t dim, std::vector<ConjugateTerm> terms);

    double operator()(std::span<const double> theta) const;

    bool valid() const { return impl_ != nullptr; }
    const std::string& label() const;
    std::size_t dim() const;
    // Empty for opaque densities.
    const std::vector<ConjugateTerm>& terms() const;
    bool structured() const;
    // Coordinates constrained to (0, inf).
    const std::vector<std::size_t>& positive_coords() const;

    // Same density acting on theta[offset, offset + dim()) of a larger vector.
    LogDensity embedded(std::size_t offset, std::size_t total_dim) const;
    LogDensity relabelled(std::string label) const;

private:
    struct Impl;
    explicit LogDensity(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// Sum of log-densities over the same parameter vector.
LogDensity product(std::string label, const std::vector<LogDensity>& factors);

// Multivariate normal with diagonal covariance. `log_scale` is added to the
// normalised log-density, so the kernel integrates to exp(log_scale).
LogDensity normal_diag(std::vector<double> mean, std::vector<double> var, double log_scale = 0.0,
                       std::string label = "normal");
// Multivariate normal with full covariance (row-major d x d).
LogDensity normal_full(std::vector<double> mean, std::vector<double> cov, double log_scale = 0.0,
                       std::string label = "normal");
// Unnormalised Gaussian kernel c * exp(-(x - m)' S^{-1} (x - m) / 2), full covariance.
LogDensity gaussian_kernel(std::vector<double> mean, std::vector<double> cov, double scale = 1.0,
                           std::string label = "gaussian-kernel");
LogDensity inverse_gamma(double shape, double rate, std::string label = "inverse-gamma");

// ---------------------------------------------------------------------------
// Paths

struct GeometricPath {
    LogDensity q0, q1;
};

// Compound path: a geometric hyper-path between two nested geometric paths.
// q1_of_1 and q0_of_0 are the endpoint targets; q0_of_1 and q1_of_0 link them.
struct QuadrivialPath {
    LogDensity q1_of_1, q0_of_1, q1_of_0, q0_of_0;
};

// t log q1 + (1 - t) log q0; the zero-weighted endpoint is skipped at t in {0, 1}.
double geometric_log_q(const GeometricPath& path, std::span<const double> theta, double t);
// log q1 - log q0; SupportError if either is -inf.
double u_statistic(const GeometricPath& path, std::span<const double> theta);
double quadrivial_log_q(const QuadrivialPath& path, std::span<const double> theta, double t);
// d/dt of quadrivial_log_q.
double quadrivial_u(const QuadrivialPath& path, std::span<const double> theta, double t);

// Either path kind behind one interface: a fixed set of component densities
// whose log-values are combined with t-dependent weights.
class Path {
public:
    Path(GeometricPath path);
    Path(QuadrivialPath path);

    bool is_geometric() const { return std::holds_alternative<GeometricPath>(path_); }
    const GeometricPath& geometric() const { return std::get<GeometricPath>(path_); }
    const QuadrivialPath& quadrivial() const { return std::get<QuadrivialPath>(path_); }

    std::size_t dim() const { return components_.front().dim(); }
    const std::vector<LogDensity>& components() const { return components_; }
    std::vector<double> weights(double t) const;
    std::vector<double> weight_derivatives(double t) const;
    // Union of the components' positive coordinates.
    std::vector<std::size_t> positive_coords() const;

    double log_q(std::span<const double> theta, double t) const;
    double u(std::span<const double> theta, double t) const;

    // Log-values of every component at theta (size components().size()).
    void component_logs(std::span<const double> theta, std::span<double> out) const;
    // Weighted combination of precomputed component logs.
    double combine(std::span<const double> logs, double t) const;
    double combine_u(std::span<const double> logs, double t) const;

    // q0 and q1 exchanged (geometric only).
    Path swapped() const;

private:
    std::variant<GeometricPath, QuadrivialPath> path_;
    std::vector<LogDensity> components_;
};

void check_temperature(double t, const char* module);

}  // namespace thermo
