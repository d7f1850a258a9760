#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "thermopath/sampler.hpp"

namespace thermo {

// A point estimate with its batch-means Monte Carlo error: value is the mean of
// batch_values and mce their standard deviation.
struct EstimateWithError {
    double value = 0;
    double mce = 0;
    std::vector<double> batch_values;
    std::size_t n_batches = 0;

    static EstimateWithError from_batches(std::vector<double> values);
    static EstimateWithError exact(double value) { return {value, 0.0, {}, 0}; }
};

// Consecutive, equally sized batches of every chain. batch_size 0 means
// min retained length / n_batches.
struct BatchSpec {
    std::size_t n_batches = 30;
    std::size_t batch_size = 0;

    // Validated batch size for a ladder; ArgumentError naming the required
    // minimum when the chains are too short.
    std::size_t resolve(const LadderOutput& ladder) const;
};

// Runs `estimator` on batch b of every chain (paired by index across
// temperatures) for each b, then summarises the batch values.
EstimateWithError batch_means(const LadderOutput& ladder, const std::function<double(const LadderOutput&)>& estimator,
                              const BatchSpec& spec = {});

// Same for an estimator with several outputs; one summary per output.
std::vector<EstimateWithError> batch_means_multi(
    const LadderOutput& ladder, const std::function<std::vector<double>(const LadderOutput&)>& estimator,
    const BatchSpec& spec = {});

// Standard error of the mean of a single series by batch means.
double batch_standard_error(const std::vector<double>& values, std::size_t n_batches = 30);

}  // namespace thermo
