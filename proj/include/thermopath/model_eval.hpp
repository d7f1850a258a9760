#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermopath/densities.hpp"
#include "thermopath/estimate.hpp"
#include "thermopath/models.hpp"
#include "thermopath/sampler.hpp"

namespace thermo {

// A likelihood f(y | theta) with the data baked in, and a proper normalised prior.
struct BayesModel {
    std::string label;
    LogDensity log_likelihood;
    LogDensity log_prior;
    ParamVector init;

    static BayesModel from(const RegressionModel& model);
    static BayesModel from(const NormalMeanModel& model);

    std::size_t dim() const { return log_prior.dim(); }
    // f(y | theta) pi(theta)
    LogDensity log_posterior_kernel() const;
    // ArgumentError on inconsistent dimensions or an invalid init.
    void validate() const;
};

// Proper, normalised approximation g of a posterior: independent normals,
// log-normal on positive coordinates.
struct ImportanceDensity {
    LogDensity density;
    std::vector<double> mean, var;  // per coordinate, on the log scale where log_scale is set
    std::vector<bool> log_scale;
};

// Moment-matched from a posterior chain (at least 100 retained draws).
// DegenerateImportanceError when a coordinate has zero sample variance.
ImportanceDensity build_importance(const ChainOutput& posterior, std::span<const std::size_t> positive_coords,
                                   const std::string& label = "importance");
// Runs a posterior chain for the model first.
ImportanceDensity build_importance(const BayesModel& model, const ChainConfig& cfg,
                                   SamplerKind sampler = SamplerKind::automatic);

enum class Method { ti, ss };
enum class NestedPath { pp, ip };

const char* to_string(Method m);
const char* to_string(NestedPath p);

struct EvalOptions {
    ChainConfig chain;
    LadderOptions ladder;  // ladder.init is filled from the models when unset
    BatchSpec batches;
    Method method = Method::ti;
};

struct EvalResult {
    EstimateWithError estimate;  // ti or ss, per EvalOptions::method
    EstimateWithError ti, ss;
    Path path;
    LadderOutput ladder;
    std::vector<std::string> warnings;
};

EvalResult marginal_pp(const BayesModel& model, const TemperatureSchedule& schedule, const EvalOptions& options);
EvalResult marginal_ip(const BayesModel& model, const ImportanceDensity& g, const TemperatureSchedule& schedule,
                       const EvalOptions& options);

// How the parameter vectors of two models relate. With shared parameters both
// models act on the same theta; otherwise theta = (theta_1, theta_0) and each
// inactive block carries a proper pseudo-prior.
struct ModelLink {
    bool shared = true;
    std::optional<LogDensity> pseudo_prior1;  // on theta_1, used where model 1 is inactive
    std::optional<LogDensity> pseudo_prior0;  // on theta_0, used where model 0 is inactive
};

// log BF_10 along the model-switch path. With disjoint parameters and no
// pseudo-priors, the importance densities g1/g0 are used when given, else a
// ConfigError is raised.
EvalResult bayes_factor_ms(const BayesModel& model1, const BayesModel& model0, const ModelLink& link,
                           const TemperatureSchedule& schedule, const EvalOptions& options,
                           const ImportanceDensity* g1 = nullptr, const ImportanceDensity* g0 = nullptr);

// log BF_10 along the quadrivial path through the two models' nested PP or IP paths.
EvalResult bayes_factor_quadrivial(const BayesModel& model1, const BayesModel& model0, NestedPath nested,
                                   const ModelLink& link, const TemperatureSchedule& schedule,
                                   const EvalOptions& options, const ImportanceDensity* g1 = nullptr,
                                   const ImportanceDensity* g0 = nullptr);

struct SeparateResult {
    EstimateWithError estimate, ti, ss;
    EvalResult model1, model0;
};

// Difference of two marginal likelihoods, paired batch by batch.
SeparateResult bayes_factor_separate(const BayesModel& model1, const BayesModel& model0, NestedPath nested,
                                     const TemperatureSchedule& schedule, const EvalOptions& options,
                                     const ImportanceDensity* g1 = nullptr, const ImportanceDensity* g0 = nullptr);

// The quadrivial and model-switch paths built by the functions above.
Path ms_path(const BayesModel& model1, const BayesModel& model0, const ModelLink& link);
Path quadrivial_path(const BayesModel& model1, const BayesModel& model0, NestedPath nested, const ModelLink& link,
                     const ImportanceDensity* g1, const ImportanceDensity* g0);

}  // namespace thermo
