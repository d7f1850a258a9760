#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace thermo {

// Response/covariate pairs for the simple linear regression
//   y_i = alpha + beta (x_i - xbar) + eps_i.
// Sufficient statistics are cached (on the y-centred scale) so the likelihood
// and the Gibbs conditionals cost O(1) per evaluation.
class RegressionData {
public:
    RegressionData(std::vector<double> y, std::vector<double> x);

    std::size_t size() const { return y_.size(); }
    std::span<const double> y() const { return y_; }
    std::span<const double> x() const { return x_; }
    double x_mean() const { return x_mean_; }
    double y_mean() const { return y_mean_; }
    double sum_xc_squared() const { return sxx_; }
    // Raw sums used by the conjugate updates.
    double sum_y() const { return static_cast<double>(y_.size()) * y_mean_ + sy_; }
    double sum_xc() const { return sx_; }
    double sum_xc_y() const { return sxy_ + y_mean_ * sx_; }

    // sum_i (y_i - alpha - beta * xc_i)^2
    double ssr(double alpha, double beta) const;
    // log f(y | alpha, beta, sigma2); -inf for sigma2 <= 0
    double log_likelihood(double alpha, double beta, double sigma2) const;

    // Ordinary least squares fit, used as a default chain initialisation.
    double ols_alpha() const { return y_mean_; }
    double ols_beta() const { return sxy_ / sxx_; }
    double ols_sigma2() const;

private:
    std::vector<double> y_, x_;
    double x_mean_ = 0, y_mean_ = 0;
    // centred sums: yc = y - ybar, xc = x - xbar
    double syy_ = 0, sy_ = 0, sx_ = 0, sxy_ = 0, sxx_ = 0;
};

// Columns of a headered CSV file, selected by name. Every cell must parse as a
// finite double.
std::vector<std::vector<double>> load_csv_columns(const std::filesystem::path& file,
                                                  const std::vector<std::string>& columns);

RegressionData load_regression_csv(const std::filesystem::path& file);

}  // namespace thermo
