#include "thermopath/models.hpp"

#include <cmath>
#include <numbers>

#include "thermopath/errors.hpp"

namespace thermo {

void RegressionPrior::validate() const {
    if (!(alpha_var > 0) || !(beta_var > 0)) throw DomainError("models", "prior variances must be positive");
    if (!(sigma2_shape > 0) || !(sigma2_rate > 0)) {
        throw DomainError("models", "inverse-gamma hyperparameters must be positive");
    }
    for (double v : {alpha_mean, beta_mean, alpha_var, beta_var, sigma2_shape, sigma2_rate}) {
        if (!std::isfinite(v)) throw DomainError("models", "prior hyperparameters must be finite");
    }
}

RegressionPrior pine_prior(int scheme) {
    switch (scheme) {
        case 1: return {3000, 185, 1e6, 1e4, 3.0, 1.8e5};
        case 2: return {3000, 0, 1e5, 1e3, 0.3, 1.8e4};
        case 3: return {3000, 0, 1e5, 1e3, 3.0, 1.8e4};
        default: throw ArgumentError("models", "pine prior scheme must be 1, 2 or 3");
    }
}

std::optional<RegressionPrior> named_prior(const std::string& name) {
    if (name == "pi1") return pine_prior(1);
    if (name == "pi2") return pine_prior(2);
    if (name == "pi3") return pine_prior(3);
    return std::nullopt;
}

RegressionModel::RegressionModel(std::shared_ptr<const RegressionData> data, RegressionPrior prior, std::string label)
    : data_(std::move(data)), prior_(prior), label_(std::move(label)) {
    if (!data_) throw ArgumentError("models", "regression model needs data");
    prior_.validate();
}

RegressionModel::RegressionModel(RegressionData data, RegressionPrior prior, std::string label)
    : RegressionModel(std::make_shared<const RegressionData>(std::move(data)), prior, std::move(label)) {}

LogDensity RegressionModel::log_likelihood() const {
    return LogDensity::from_terms(label_ + ":likelihood", 3, {RegressionLikelihoodTerm{0, data_}});
}

LogDensity RegressionModel::log_prior() const {
    return LogDensity::from_terms(label_ + ":prior", 3,
                                  {NormalTerm{0, prior_.alpha_mean, prior_.alpha_var},
                                   NormalTerm{1, prior_.beta_mean, prior_.beta_var},
                                   InverseGammaTerm{2, prior_.sigma2_shape, prior_.sigma2_rate}});
}

LogDensity RegressionModel::log_posterior_kernel() const {
    return product(label_ + ":posterior", {log_likelihood(), log_prior()});
}

ParamVector RegressionModel::default_init() const {
    return ParamVector{data_->ols_alpha(), data_->ols_beta(), data_->ols_sigma2()};
}

NormalMeanModel::NormalMeanModel(std::vector<double> y, double sigma2, double prior_mean, double prior_var,
                                 std::string label)
    : y_(std::move(y)), sigma2_(sigma2), prior_mean_(prior_mean), prior_var_(prior_var), label_(std::move(label)) {
    if (y_.empty()) throw ArgumentError("models", "normal-mean model needs data");
    if (!(sigma2_ > 0) || !(prior_var_ > 0)) throw DomainError("models", "variances must be positive");
    for (double v : y_) {
        if (!std::isfinite(v)) throw ArgumentError("models", "non-finite observation");
        sum_ += v;
        sum_sq_ += v * v;
    }
}

LogDensity NormalMeanModel::log_likelihood() const {
    const double n = static_cast<double>(y_.size());
    const double constant = -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2_);
    const double s = sum_, ss = sum_sq_, s2 = sigma2_;
    return LogDensity::custom(label_ + ":likelihood", 1, [=](std::span<const double> theta) {
        const double m = theta[0];
        return constant - (ss - 2.0 * m * s + n * m * m) / (2.0 * s2);
    });
}

LogDensity NormalMeanModel::log_prior() const {
    return normal_diag({prior_mean_}, {prior_var_}, 0.0, label_ + ":prior");
}

ParamVector NormalMeanModel::default_init() const { return ParamVector{sum_ / static_cast<double>(y_.size())}; }

double NormalMeanModel::exact_log_marginal() const {
    // Sherman-Morrison on C = s2 I + v 1 1'.
    const double n = static_cast<double>(y_.size());
    const double s2 = sigma2_, v = prior_var_;
    const double sr = sum_ - n * prior_mean_;
    const double srr = sum_sq_ - 2.0 * prior_mean_ * sum_ + n * prior_mean_ * prior_mean_;
    const double quad = srr / s2 - (v / (s2 * (s2 + n * v))) * sr * sr;
    const double log_det = (n - 1.0) * std::log(s2) + std::log(s2 + n * v);
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

double NormalMeanModel::posterior_var() const {
    return 1.0 / (1.0 / prior_var_ + static_cast<double>(y_.size()) / sigma2_);
}

double NormalMeanModel::posterior_mean() const {
    return posterior_var() * (prior_mean_ / prior_var_ + sum_ / sigma2_);
}

}  // namespace thermo
