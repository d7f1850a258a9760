#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thermopath/data.hpp"
#include "thermopath/densities.hpp"

namespace thermo {

// Independent normal priors on (alpha, beta) and an inverse-gamma prior on sigma2.
struct RegressionPrior {
    double alpha_mean = 0, beta_mean = 0;
    double alpha_var = 1, beta_var = 1;
    double sigma2_shape = 1, sigma2_rate = 1;

    void validate() const;
};

// Named prior schemes for the pine regression. pi2 and pi3 carry the
// inverse-gamma shapes under which the reference marginal likelihoods
// -323.4 (pi2) and -328.2 (pi3) hold.
RegressionPrior pine_prior(int scheme);
std::optional<RegressionPrior> named_prior(const std::string& name);

// Parameter layout theta = (alpha, beta, sigma2).
class RegressionModel {
public:
    RegressionModel(std::shared_ptr<const RegressionData> data, RegressionPrior prior, std::string label = "regression");
    RegressionModel(RegressionData data, RegressionPrior prior, std::string label = "regression");

    const RegressionData& data() const { return *data_; }
    std::shared_ptr<const RegressionData> data_ptr() const { return data_; }
    const RegressionPrior& prior() const { return prior_; }
    const std::string& label() const { return label_; }

    LogDensity log_likelihood() const;
    LogDensity log_prior() const;
    // f(y | theta) pi(theta)
    LogDensity log_posterior_kernel() const;
    // OLS point, always inside the support.
    ParamVector default_init() const;

private:
    std::shared_ptr<const RegressionData> data_;
    RegressionPrior prior_;
    std::string label_;
};

// y_i ~ N(theta, sigma2) with sigma2 known, theta ~ N(prior_mean, prior_var).
// Its likelihood is deliberately opaque so that it exercises the generic
// random-walk sampler.
class NormalMeanModel {
public:
    NormalMeanModel(std::vector<double> y, double sigma2, double prior_mean, double prior_var,
                    std::string label = "normal-mean");

    std::span<const double> y() const { return y_; }
    double sigma2() const { return sigma2_; }
    double prior_mean() const { return prior_mean_; }
    double prior_var() const { return prior_var_; }
    const std::string& label() const { return label_; }

    LogDensity log_likelihood() const;
    LogDensity log_prior() const;
    ParamVector default_init() const;
    // Closed-form log marginal likelihood log N(y; m 1, sigma2 I + v 1 1').
    double exact_log_marginal() const;
    double posterior_mean() const;
    double posterior_var() const;

private:
    std::vector<double> y_;
    double sigma2_, prior_mean_, prior_var_;
    double sum_ = 0, sum_sq_ = 0;
    std::string label_;
};

}  // namespace thermo
