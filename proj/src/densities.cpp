#include "thermopath/densities.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t max_coord(const ConjugateTerm& term) {
    return std::visit(overloaded{
                          [](const ConstantTerm&) -> std::size_t { return 0; },
                          [](const NormalTerm& t) { return t.coord + 1; },
                          [](const InverseGammaTerm& t) { return t.coord + 1; },
                          [](const LogNormalTerm& t) { return t.coord + 1; },
                          [](const RegressionLikelihoodTerm& t) { return t.offset + 3; },
                      },
                      term);
}

ConjugateTerm shift_term(ConjugateTerm term, std::size_t offset) {
    std::visit(overloaded{
                   [](ConstantTerm&) {},
                   [&](NormalTerm& t) { t.coord += offset; },
                   [&](InverseGammaTerm& t) { t.coord += offset; },
                   [&](LogNormalTerm& t) { t.coord += offset; },
                   [&](RegressionLikelihoodTerm& t) { t.offset += offset; },
               },
               term);
    return term;
}

void collect_positive(const ConjugateTerm& term, std::vector<std::size_t>& out) {
    std::visit(overloaded{
                   [](const ConstantTerm&) {},
                   [](const NormalTerm&) {},
                   [&](const InverseGammaTerm& t) { out.push_back(t.coord); },
                   [&](const LogNormalTerm& t) { out.push_back(t.coord); },
                   [&](const RegressionLikelihoodTerm& t) { out.push_back(t.offset + 2); },
               },
               term);
}

void sort_unique(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ArgumentError("densities", "parameter vector must be non-empty");
    for (double v : values_) {
        if (!std::isfinite(v)) throw ArgumentError("densities", "parameter vector has a non-finite entry");
    }
}

double evaluate_term(const ConjugateTerm& term, std::span<const double> theta) {
    return std::visit(
        overloaded{
            [](const ConstantTerm& t) { return t.value; },
            [&](const NormalTerm& t) {
                const double d = theta[t.coord] - t.mean;
                return -0.5 * (kLog2Pi + std::log(t.var)) - 0.5 * d * d / t.var;
            },
            [&](const InverseGammaTerm& t) {
                const double s = theta[t.coord];
                if (!(s > 0)) return kNegInf;
                return t.shape * std::log(t.rate) - std::lgamma(t.shape) - (t.shape + 1.0) * std::log(s) -
                       t.rate / s;
            },
            [&](const LogNormalTerm& t) {
                const double s = theta[t.coord];
                if (!(s > 0)) return kNegInf;
                const double ls = std::log(s);
                const double d = ls - t.mean;
                return -0.5 * (kLog2Pi + std::log(t.var)) - 0.5 * d * d / t.var - ls;
            },
            [&](const RegressionLikelihoodTerm& t) {
                return t.data->log_likelihood(theta[t.offset], theta[t.offset + 1], theta[t.offset + 2]);
            },
        },
        term);
}

struct LogDensity::Impl {
    std::string label;
    std::size_t dim = 0;
    Fn fn;
    SupportFn support;
    std::vector<ConjugateTerm> terms;
    std::vector<std::size_t> positive;
};

LogDensity LogDensity::custom(std::string label, std::size_t dim, Fn fn,
                              std::vector<std::size_t> positive_coords, SupportFn support) {
    if (dim == 0) throw ArgumentError("densities", "density dimension must be positive");
    if (!fn) throw ArgumentError("densities", "density function is empty");
    for (auto k : positive_coords) {
        if (k >= dim) throw ArgumentError("densities", "positive coordinate out of range");
    }
    sort_unique(positive_coords);
    auto impl = std::make_shared<Impl>();
    impl->label = std::move(label);
    impl->dim = dim;
    impl->fn = std::move(fn);
    impl->support = std::move(support);
    impl->positive = std::move(positive_coords);
    return LogDensity(std::move(impl));
}

LogDensity LogDensity::from_terms(std::string label, std::size_t dim, std::vector<ConjugateTerm> terms) {
    if (dim == 0) throw ArgumentError("densities", "density dimension must be positive");
    std::vector<std::size_t> positive;
    for (const auto& term : terms) {
        if (max_coord(term) > dim) throw ArgumentError("densities", "term coordinate out of range");
        collect_positive(term, positive);
    }
    sort_unique(positive);
    auto impl = std::make_shared<Impl>();
    impl->label = std::move(label);
    impl->dim = dim;
    impl->terms = std::move(terms);
    impl->positive = std::move(positive);
    impl->fn = [terms = impl->terms](std::span<const double> theta) {
        double sum = 0;
        for (const auto& term : terms) {
            sum += evaluate_term(term, theta);
            if (sum == kNegInf) return kNegInf;
        }
        return sum;
    };
    return LogDensity(std::move(impl));
}

double LogDensity::operator()(std::span<const double> theta) const {
    if (!impl_) throw ArgumentError("densities", "evaluating an empty density");
    if (theta.size() != impl_->dim) {
        throw ArgumentError("densities", impl_->label + ": expected dimension " + std::to_string(impl_->dim) +
                                             ", got " + std::to_string(theta.size()));
    }
    if (impl_->support && !impl_->support(theta)) return kNegInf;
    const double v = impl_->fn(theta);
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw NumericError("densities", impl_->label + " returned " + std::to_string(v),
                           std::vector<double>(theta.begin(), theta.end()));
    }
    return v;
}

const std::string& LogDensity::label() const { return impl_->label; }
std::size_t LogDensity::dim() const { return impl_->dim; }
const std::vector<ConjugateTerm>& LogDensity::terms() const { return impl_->terms; }
bool LogDensity::structured() const { return impl_ && !impl_->terms.empty(); }
const std::vector<std::size_t>& LogDensity::positive_coords() const { return impl_->positive; }

LogDensity LogDensity::embedded(std::size_t offset, std::size_t total_dim) const {
    if (offset + dim() > total_dim) throw ArgumentError("densities", "embedding out of range");
    if (structured()) {
        std::vector<ConjugateTerm> shifted;
        for (const auto& term : terms()) shifted.push_back(shift_term(term, offset));
        return from_terms(label(), total_dim, std::move(shifted));
    }
    std::vector<std::size_t> positive;
    for (auto k : positive_coords()) positive.push_back(k + offset);
    const auto inner = *this;
    const auto d = dim();
    return custom(
        label(), total_dim, [inner, offset, d](std::span<const double> theta) { return inner(theta.subspan(offset, d)); },
        std::move(positive));
}

LogDensity LogDensity::relabelled(std::string label) const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->label = std::move(label);
    return LogDensity(std::move(impl));
}

LogDensity product(std::string label, const std::vector<LogDensity>& factors) {
    if (factors.empty()) throw ArgumentError("densities", "product of no densities");
    const auto dim = factors.front().dim();
    bool all_structured = true;
    for (const auto& f : factors) {
        if (f.dim() != dim) throw ArgumentError("densities", "product factors differ in dimension");
        all_structured = all_structured && f.structured();
    }
    if (all_structured) {
        std::vector<ConjugateTerm> terms;
        for (const auto& f : factors) terms.insert(terms.end(), f.terms().begin(), f.terms().end());
        return LogDensity::from_terms(std::move(label), dim, std::move(terms));
    }
    std::vector<std::size_t> positive;
    for (const auto& f : factors) positive.insert(positive.end(), f.positive_coords().begin(), f.positive_coords().end());
    return LogDensity::custom(
        std::move(label), dim,
        [factors](std::span<const double> theta) {
            double sum = 0;
            for (const auto& f : factors) {
                sum += f(theta);
                if (sum == kNegInf) return kNegInf;
            }
            return sum;
        },
        std::move(positive));
}

LogDensity normal_diag(std::vector<double> mean, std::vector<double> var, double log_scale, std::string label) {
    if (mean.empty() || mean.size() != var.size()) {
        throw ArgumentError("densities", "normal: mean and variance sizes differ");
    }
    std::vector<ConjugateTerm> terms;
    for (std::size_t k = 0; k < mean.size(); ++k) {
        if (!(var[k] > 0) || !std::isfinite(var[k]) || !std::isfinite(mean[k])) {
            throw DomainError("densities", "normal: variances must be positive and finite");
        }
        terms.emplace_back(NormalTerm{k, mean[k], var[k]});
    }
    if (log_scale != 0.0) terms.emplace_back(ConstantTerm{log_scale});
    return LogDensity::from_terms(std::move(label), mean.size(), std::move(terms));
}

LogDensity normal_full(std::vector<double> mean, std::vector<double> cov, double log_scale, std::string label) {
    const auto d = mean.size();
    if (d == 0 || cov.size() != d * d) throw ArgumentError("densities", "normal: covariance must be d x d");
    Eigen::MatrixXd sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw DomainError("densities", "normal: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("densities", "normal: covariance not positive definite");
    Eigen::MatrixXd lower = llt.matrixL();
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    const double constant = log_scale - 0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(d));
    return LogDensity::custom(std::move(label), d, [lower, mu, constant](std::span<const double> theta) {
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(theta.data(), mu.size()) - mu;
        Eigen::VectorXd z = lower.triangularView<Eigen::Lower>().solve(r);
        return constant - 0.5 * z.squaredNorm();
    });
}

LogDensity gaussian_kernel(std::vector<double> mean, std::vector<double> cov, double scale, std::string label) {
    if (!(scale > 0)) throw DomainError("densities", "kernel scale must be positive");
    const auto d = mean.size();
    if (d == 0 || cov.size() != d * d) throw ArgumentError("densities", "kernel: covariance must be d x d");
    Eigen::MatrixXd sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("densities", "kernel: covariance not positive definite");
    const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    // kernel = scale * exp(-quad/2) = scale * (2 pi)^{d/2} |S|^{1/2} * N(x; m, S)
    const double log_scale = std::log(scale) + 0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
    bool diagonal = true;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j && cov[i * d + j] != 0.0) diagonal = false;
    if (diagonal) {
        std::vector<double> var(d);
        for (std::size_t i = 0; i < d; ++i) var[i] = cov[i * d + i];
        return normal_diag(std::move(mean), std::move(var), log_scale, std::move(label));
    }
    return normal_full(std::move(mean), std::move(cov), log_scale, std::move(label));
}

LogDensity inverse_gamma(double shape, double rate, std::string label) {
    if (!(shape > 0) || !(rate > 0)) throw DomainError("densities", "inverse-gamma: shape and rate must be positive");
    return LogDensity::from_terms(std::move(label), 1, {InverseGammaTerm{0, shape, rate}});
}

// ---------------------------------------------------------------------------

void check_temperature(double t, const char* module) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError(module, "temperature " + std::to_string(t) + " outside [0, 1]");
    }
}

namespace {

double weighted_sum(std::span<const double> logs, std::span<const double> w) {
    double sum = 0;
    for (std::size_t j = 0; j < logs.size(); ++j) {
        if (w[j] == 0.0) continue;
        if (logs[j] == kNegInf) return kNegInf;
        sum += w[j] * logs[j];
    }
    return sum;
}

std::array<double, 4> quadrivial_weights(double t) {
    return {t * t, t * (1 - t), t * (1 - t), (1 - t) * (1 - t)};
}
std::array<double, 4> quadrivial_dweights(double t) {
    return {2 * t, 1 - 2 * t, 1 - 2 * t, -2 * (1 - t)};
}

}  // namespace

double geometric_log_q(const GeometricPath& path, std::span<const double> theta, double t) {
    check_temperature(t, "densities");
    if (t == 0.0) return path.q0(theta);
    if (t == 1.0) return path.q1(theta);
    const double l0 = path.q0(theta);
    if (l0 == kNegInf) return kNegInf;
    const double l1 = path.q1(theta);
    if (l1 == kNegInf) return kNegInf;
    return t * l1 + (1.0 - t) * l0;
}

double u_statistic(const GeometricPath& path, std::span<const double> theta) {
    const double l1 = path.q1(theta);
    if (l1 == kNegInf) throw SupportError("densities", "U undefined: q1 is zero at theta", path.q1.label());
    const double l0 = path.q0(theta);
    if (l0 == kNegInf) throw SupportError("densities", "U undefined: q0 is zero at theta", path.q0.label());
    return l1 - l0;
}

double quadrivial_log_q(const QuadrivialPath& path, std::span<const double> theta, double t) {
    check_temperature(t, "densities");
    const std::array<const LogDensity*, 4> comps{&path.q1_of_1, &path.q0_of_1, &path.q1_of_0, &path.q0_of_0};
    const auto w = quadrivial_weights(t);
    double sum = 0;
    for (std::size_t j = 0; j < 4; ++j) {
        if (w[j] == 0.0) continue;
        const double l = (*comps[j])(theta);
        if (l == kNegInf) return kNegInf;
        sum += w[j] * l;
    }
    return sum;
}

double quadrivial_u(const QuadrivialPath& path, std::span<const double> theta, double t) {
    check_temperature(t, "densities");
    const std::array<const LogDensity*, 4> comps{&path.q1_of_1, &path.q0_of_1, &path.q1_of_0, &path.q0_of_0};
    const auto w = quadrivial_dweights(t);
    double sum = 0;
    for (std::size_t j = 0; j < 4; ++j) {
        if (w[j] == 0.0) continue;
        const double l = (*comps[j])(theta);
        if (l == kNegInf) throw SupportError("densities", "quadrivial U undefined at theta", comps[j]->label());
        sum += w[j] * l;
    }
    return sum;
}

Path::Path(GeometricPath path) : path_(path), components_{path.q0, path.q1} {
    if (!path.q0.valid() || !path.q1.valid()) throw ArgumentError("densities", "path endpoint is empty");
    if (path.q0.dim() != path.q1.dim()) throw ArgumentError("densities", "path endpoints differ in dimension");
}

Path::Path(QuadrivialPath path)
    : path_(path), components_{path.q1_of_1, path.q0_of_1, path.q1_of_0, path.q0_of_0} {
    for (const auto& c : components_) {
        if (!c.valid()) throw ArgumentError("densities", "quadrivial component is empty");
        if (c.dim() != components_.front().dim()) {
            throw ArgumentError("densities", "quadrivial components differ in dimension");
        }
    }
}

std::vector<double> Path::weights(double t) const {
    if (is_geometric()) return {1.0 - t, t};
    const auto w = quadrivial_weights(t);
    return {w.begin(), w.end()};
}

std::vector<double> Path::weight_derivatives(double t) const {
    if (is_geometric()) return {-1.0, 1.0};
    const auto w = quadrivial_dweights(t);
    return {w.begin(), w.end()};
}

std::vector<std::size_t> Path::positive_coords() const {
    std::vector<std::size_t> out;
    for (const auto& c : components_) out.insert(out.end(), c.positive_coords().begin(), c.positive_coords().end());
    sort_unique(out);
    return out;
}

double Path::log_q(std::span<const double> theta, double t) const {
    if (is_geometric()) return geometric_log_q(geometric(), theta, t);
    return quadrivial_log_q(quadrivial(), theta, t);
}

double Path::u(std::span<const double> theta, double t) const {
    if (is_geometric()) return u_statistic(geometric(), theta);
    return quadrivial_u(quadrivial(), theta, t);
}

void Path::component_logs(std::span<const double> theta, std::span<double> out) const {
    for (std::size_t j = 0; j < components_.size(); ++j) out[j] = components_[j](theta);
}

double Path::combine(std::span<const double> logs, double t) const {
    const auto w = weights(t);
    return weighted_sum(logs, w);
}

double Path::combine_u(std::span<const double> logs, double t) const {
    const auto w = weight_derivatives(t);
    for (std::size_t j = 0; j < logs.size(); ++j) {
        if (w[j] != 0.0 && logs[j] == kNegInf) {
            throw SupportError("densities", "U undefined at theta", components_[j].label());
        }
    }
    return weighted_sum(logs, w);
}

Path Path::swapped() const {
    if (!is_geometric()) throw ArgumentError("densities", "only geometric paths can be swapped");
    return Path(GeometricPath{geometric().q1, geometric().q0});
}

}  // namespace thermo
