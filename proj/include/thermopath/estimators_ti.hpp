#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermopath/estimate.hpp"
#include "thermopath/sampler.hpp"
#include "thermopath/schedules.hpp"

namespace thermo {

// Per-temperature sample mean and unbiased sample variance of U.
struct EtCurve {
    TemperatureSchedule schedule;
    std::vector<double> e_hat;
    std::vector<double> v_hat;
    std::vector<std::size_t> r;
};

// Functional KL of order t: e_hat minus the log-ratio estimate.
struct KlTCurve {
    TemperatureSchedule schedule;
    std::vector<double> kl_t_hat;
    double log_lambda_hat = 0;
};

EtCurve e_hat_curve(const LadderOutput& ladder);
// Trapezoid rule over the schedule.
double ti_trapezoid(const EtCurve& curve);
// TI log-ratio with batch-means error.
EstimateWithError ti_estimate(const LadderOutput& ladder, const BatchSpec& spec = {});

KlTCurve kl_t_curve(const EtCurve& curve, double log_lambda_hat);
// Trapezoid integral of kl_t_hat from 0 to each schedule point (first entry 0).
std::vector<double> nti_partial(const KlTCurve& curve);
// Same integral up to an arbitrary t, interpolating kl_t_hat linearly inside
// the containing panel.
double nti_at(const KlTCurve& curve, double t);

struct TStarOptions {
    double tol = 1e-3;
    std::size_t max_extra_runs = 30;
    // Extra runs are seeded with chain_seed(cfg.seed, seed_offset + k).
    std::uint64_t seed_offset = 1u << 20;
    SamplerKind sampler = SamplerKind::automatic;
    std::size_t batches_for_sign_risk = 30;
};

struct TStarResult {
    double t_star = 0.5;
    // Final bracket: largest t with negative and smallest t with positive KL.
    double lo = 0, hi = 1;
    double half_width = 0.5;
    // Probability that the estimated KL sign at lo / hi is wrong (normal
    // approximation with a batch-means standard error).
    double sign_risk_lo = 0, sign_risk_hi = 0;
    std::size_t extra_runs = 0;
    double log_lambda_hat = 0;
    LadderOutput ladder;
    std::vector<std::string> warnings;
};

// Locates the sign change of the KL curve and bisects it with new runs until
// the bracket is no wider than tol. DegeneratePathError when KL has no sign
// change on [0, 1].
TStarResult estimate_t_star(const Path& path, LadderOutput ladder, const ChainConfig& cfg,
                            const TStarOptions& options = {});
TStarResult estimate_t_star(const Path& path, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                            const LadderOptions& ladder_options, const TStarOptions& options = {});

// Chernoff information: minus the trapezoid KL integral over the panels that
// end at or before t_star. With log_lambda_hat unset each batch uses its own
// TI estimate.
EstimateWithError chernoff_information(const LadderOutput& ladder, double t_star,
                                       std::optional<double> log_lambda_hat = std::nullopt,
                                       const BatchSpec& spec = {});

// Chernoff t-divergence, minus the KL integral from 0 to t.
EstimateWithError chernoff_t_divergence(const LadderOutput& ladder, double t,
                                        std::optional<double> log_lambda_hat = std::nullopt,
                                        const BatchSpec& spec = {});

enum class TsallisSign {
    positive,  // [1 - exp(-C)] / (1 - t)
    negative,  // [exp(-C) - 1] / (1 - t)
};

struct DivergenceReport {
    EstimateWithError log_lambda;
    EstimateWithError kl_1_0, kl_0_1, j;
    EstimateWithError bhattacharyya, hellinger;
    EstimateWithError chernoff_info;
    double t_star = 0.5;
    EstimateWithError renyi_at_t_star, tsallis_at_t_star;
};

// Every divergence from one ladder. Needs runs at t = 0 and t = 1; the
// Bhattacharyya term is interpolated if 0.5 is not a schedule point.
DivergenceReport divergence_report(const LadderOutput& ladder, double t_star,
                                   std::optional<double> log_lambda_hat = std::nullopt, const BatchSpec& spec = {},
                                   TsallisSign tsallis = TsallisSign::positive);

}  // namespace thermo
