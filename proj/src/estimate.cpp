#include "thermopath/estimate.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

EstimateWithError EstimateWithError::from_batches(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("diagnostics", "no batch values");
    EstimateWithError e;
    e.value = mean_of(values);
    e.mce = sd_of(values);
    e.n_batches = values.size();
    e.batch_values = std::move(values);
    return e;
}

std::size_t BatchSpec::resolve(const LadderOutput& ladder) const {
    if (n_batches < 2) throw ArgumentError("diagnostics", "at least 2 batches are required");
    if (batch_size == 1) throw ArgumentError("diagnostics", "batch size must be at least 2");
    const std::size_t available = ladder.min_size();
    const std::size_t size = batch_size ? batch_size : available / n_batches;
    if (size < 2 || size * n_batches > available) {
        const std::size_t need = n_batches * std::max<std::size_t>(size, 2);
        throw ArgumentError("diagnostics", "batch means need at least " + std::to_string(need) +
                                               " retained samples per chain, shortest chain has " +
                                               std::to_string(available));
    }
    return size;
}

EstimateWithError batch_means(const LadderOutput& ladder, const std::function<double(const LadderOutput&)>& estimator,
                              const BatchSpec& spec) {
    const std::size_t size = spec.resolve(ladder);
    std::vector<double> values(spec.n_batches);
    for (std::size_t b = 0; b < spec.n_batches; ++b) values[b] = estimator(ladder.batch(b, size));
    return EstimateWithError::from_batches(std::move(values));
}

std::vector<EstimateWithError> batch_means_multi(
    const LadderOutput& ladder, const std::function<std::vector<double>(const LadderOutput&)>& estimator,
    const BatchSpec& spec) {
    const std::size_t size = spec.resolve(ladder);
    std::vector<std::vector<double>> per_output;
    for (std::size_t b = 0; b < spec.n_batches; ++b) {
        const auto v = estimator(ladder.batch(b, size));
        if (b == 0) per_output.assign(v.size(), std::vector<double>(spec.n_batches));
        if (v.size() != per_output.size()) throw ArgumentError("diagnostics", "estimator output size changed");
        for (std::size_t k = 0; k < v.size(); ++k) per_output[k][b] = v[k];
    }
    std::vector<EstimateWithError> out;
    out.reserve(per_output.size());
    for (auto& v : per_output) out.push_back(EstimateWithError::from_batches(std::move(v)));
    return out;
}

double batch_standard_error(const std::vector<double>& values, std::size_t n_batches) {
    const std::size_t size = values.size() / n_batches;
    if (size < 1 || n_batches < 2) throw ArgumentError("diagnostics", "series too short for batch means");
    std::vector<double> means(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0;
        for (std::size_t i = 0; i < size; ++i) s += values[b * size + i];
        means[b] = s / static_cast<double>(size);
    }
    return sd_of(means) / std::sqrt(static_cast<double>(n_batches));
}

}  // namespace thermo
