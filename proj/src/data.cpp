#include "thermopath/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

RegressionData::RegressionData(std::vector<double> y, std::vector<double> x)
    : y_(std::move(y)), x_(std::move(x)) {
    if (y_.size() != x_.size()) {
        throw ArgumentError("data", "y and x must have the same length");
    }
    if (y_.size() < 3) {
        throw ArgumentError("data", "regression needs at least 3 observations");
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i]) || !std::isfinite(x_[i])) {
            throw ArgumentError("data", "non-finite observation at row " + std::to_string(i + 1));
        }
    }
    const double n = static_cast<double>(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
        x_mean_ += x_[i];
        y_mean_ += y_[i];
    }
    x_mean_ /= n;
    y_mean_ /= n;
    for (std::size_t i = 0; i < y_.size(); ++i) {
        const double xc = x_[i] - x_mean_;
        const double yc = y_[i] - y_mean_;
        syy_ += yc * yc;
        sy_ += yc;
        sx_ += xc;
        sxy_ += xc * yc;
        sxx_ += xc * xc;
    }
    if (sxx_ <= 0) throw ArgumentError("data", "covariate x is constant");
}

double RegressionData::ssr(double alpha, double beta) const {
    const double a = alpha - y_mean_;
    const double n = static_cast<double>(y_.size());
    const double value = syy_ - 2.0 * a * sy_ - 2.0 * beta * sxy_ + n * a * a + 2.0 * a * beta * sx_ +
                         beta * beta * sxx_;
    return value > 0 ? value : 0.0;
}

double RegressionData::log_likelihood(double alpha, double beta, double sigma2) const {
    if (!(sigma2 > 0)) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(y_.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - ssr(alpha, beta) / (2.0 * sigma2);
}

double RegressionData::ols_sigma2() const {
    return ssr(ols_alpha(), ols_beta()) / static_cast<double>(y_.size() - 2);
}

std::vector<std::vector<double>> load_csv_columns(const std::filesystem::path& file,
                                                  const std::vector<std::string>& columns) {
    std::ifstream in(file);
    if (!in) throw ArgumentError("data", "cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("data", file.string() + " is empty");
    const auto header = split_csv_line(line);
    std::vector<std::size_t> index;
    for (const auto& name : columns) {
        std::size_t k = 0;
        while (k < header.size() && header[k] != name) ++k;
        if (k == header.size()) {
            throw ArgumentError("data", file.string() + " has no column '" + name + "'");
        }
        index.push_back(k);
    }
    std::vector<std::vector<double>> out(columns.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        for (std::size_t c = 0; c < index.size(); ++c) {
            if (index[c] >= cells.size()) {
                throw ArgumentError("data", file.string() + ":" + std::to_string(row) + ": missing cell");
            }
            double v = 0;
            std::size_t used = 0;
            try {
                v = std::stod(cells[index[c]], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[index[c]].size() || !std::isfinite(v)) {
                throw ArgumentError("data", file.string() + ":" + std::to_string(row) + ": '" +
                                                cells[index[c]] + "' is not a finite number");
            }
            out[c].push_back(v);
        }
    }
    return out;
}

RegressionData load_regression_csv(const std::filesystem::path& file) {
    auto cols = load_csv_columns(file, {"y", "x"});
    return RegressionData(std::move(cols[0]), std::move(cols[1]));
}

}  // namespace thermo
