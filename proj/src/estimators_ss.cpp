#include "thermopath/estimators_ss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

struct LogMeanExp {
    double value;
    double ess;
};

LogMeanExp log_mean_exp(const std::vector<double>& x) {
    const double max = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(max)) throw NumericError("estimators_ss", "every importance weight vanished");
    double s = 0, s2 = 0;
    for (double v : x) {
        const double w = std::exp(v - max);
        s += w;
        s2 += w * w;
    }
    const double n = static_cast<double>(x.size());
    const double mean = s / n;
    // variance of w / mean(w)
    const double var = n > 1 ? (s2 / n - mean * mean) / (mean * mean) * n / (n - 1.0) : 0.0;
    return {max + std::log(mean), n / (1.0 + std::max(0.0, var))};
}

std::vector<double> step_increments(const ChainOutput& chain, const Path& path, double t_next) {
    if (chain.size() == 0) throw ArgumentError("estimators_ss", "empty chain at t = " + std::to_string(chain.t));
    const double delta = t_next - chain.t;
    if (!(delta > 0)) throw ArgumentError("estimators_ss", "stepping-stone step must have positive width");
    std::vector<double> inc(chain.size());
    if (path.is_geometric()) {
        for (std::size_t r = 0; r < inc.size(); ++r) inc[r] = delta * chain.u_values[r];
        return inc;
    }
    const std::size_t m = path.components().size();
    std::vector<double> logs(m);
    const auto w_lo = path.weights(chain.t), w_hi = path.weights(t_next);
    for (std::size_t r = 0; r < inc.size(); ++r) {
        path.component_logs(chain.sample(r), logs);
        double v = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double dw = w_hi[j] - w_lo[j];
            if (dw == 0.0) continue;
            if (logs[j] == -std::numeric_limits<double>::infinity()) {
                throw SupportError("estimators_ss", "component vanishes on a sampled point",
                                   path.components()[j].label());
            }
            v += dw * logs[j];
        }
        inc[r] = v;
    }
    return inc;
}

}  // namespace

double ss_step_log_ratio(const ChainOutput& chain, double delta) {
    if (chain.size() == 0) throw ArgumentError("estimators_ss", "empty chain at t = " + std::to_string(chain.t));
    if (!(delta > 0)) throw ArgumentError("estimators_ss", "stepping-stone step must have positive width");
    std::vector<double> inc(chain.size());
    for (std::size_t r = 0; r < inc.size(); ++r) inc[r] = delta * chain.u_values[r];
    return log_mean_exp(inc).value;
}

double ss_step_log_ratio(const ChainOutput& chain, const Path& path, double t_next) {
    return log_mean_exp(step_increments(chain, path, t_next)).value;
}

SteppingStoneResult stepping_stone(const LadderOutput& ladder, const Path& path) {
    const auto& s = ladder.schedule;
    if (ladder.chains.size() != s.size()) {
        throw ArgumentError("estimators_ss", "ladder has a different number of chains and temperatures");
    }
    SteppingStoneResult r{s, 0.0, {}, {}};
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto lme = log_mean_exp(step_increments(ladder.chains[i], path, s[i + 1]));
        r.step_log_ratios.push_back(lme.value);
        r.ess_per_step.push_back(lme.ess);
        r.log_lambda_hat += lme.value;
    }
    return r;
}

EstimateWithError ss_estimate(const LadderOutput& ladder, const Path& path, const BatchSpec& spec) {
    return batch_means(ladder, [&](const LadderOutput& b) { return stepping_stone(b, path).log_lambda_hat; }, spec);
}

}  // namespace thermo
