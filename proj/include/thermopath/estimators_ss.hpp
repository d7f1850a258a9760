#pragma once

#include <vector>

#include "thermopath/densities.hpp"
#include "thermopath/estimate.hpp"
#include "thermopath/sampler.hpp"

namespace thermo {

struct SteppingStoneResult {
    TemperatureSchedule schedule;
    double log_lambda_hat = 0;
    // log(z_{t_{i+1}} / z_{t_i}) per panel
    std::vector<double> step_log_ratios;
    // r / (1 + variance of the mean-normalised weights); small values mark
    // panels where the importance step degenerates.
    std::vector<double> ess_per_step;
};

// log-mean-exp of delta * u over a chain drawn at t_i (geometric paths).
double ss_step_log_ratio(const ChainOutput& chain, double delta);
// log-mean-exp of log q_{t_next} - log q_{t_i} over the chain; valid for any
// path kind.
double ss_step_log_ratio(const ChainOutput& chain, const Path& path, double t_next);

// Sums the per-panel ratios. The chain at t = 1 is not used and may be empty.
SteppingStoneResult stepping_stone(const LadderOutput& ladder, const Path& path);
EstimateWithError ss_estimate(const LadderOutput& ladder, const Path& path, const BatchSpec& spec = {});

}  // namespace thermo
