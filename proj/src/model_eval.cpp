#include "thermopath/model_eval.hpp"

#include <cmath>

#include "thermopath/errors.hpp"
#include "thermopath/estimators_ss.hpp"
#include "thermopath/estimators_ti.hpp"

namespace thermo {

namespace {

constexpr std::size_t kMinImportanceDraws = 100;

ParamVector concat(const ParamVector& a, const ParamVector& b) {
    std::vector<double> v(a.values().begin(), a.values().end());
    v.insert(v.end(), b.values().begin(), b.values().end());
    return ParamVector(std::move(v));
}

ModelLink resolve_link(const BayesModel& model1, const BayesModel& model0, ModelLink link,
                       const ImportanceDensity* g1, const ImportanceDensity* g0) {
    if (link.shared) {
        if (model1.dim() != model0.dim()) {
            throw ConfigError("parameters", "models with shared parameters must have the same dimension");
        }
        return link;
    }
    if (!link.pseudo_prior1 && g1) link.pseudo_prior1 = g1->density;
    if (!link.pseudo_prior0 && g0) link.pseudo_prior0 = g0->density;
    if (!link.pseudo_prior1 || !link.pseudo_prior0) {
        throw ConfigError("pseudo_priors", "models with different parameter blocks need a pseudo-prior for each block");
    }
    if (link.pseudo_prior1->dim() != model1.dim() || link.pseudo_prior0->dim() != model0.dim()) {
        throw ConfigError("pseudo_priors", "pseudo-prior dimension does not match its model");
    }
    return link;
}

// Density of model 1's block (active) times model 0's pseudo-prior, on the joint vector.
LogDensity joint_with_1_active(const LogDensity& on_theta1, const ModelLink& link, std::size_t d1, std::size_t d0) {
    return product(on_theta1.label(),
                   {on_theta1.embedded(0, d1 + d0), link.pseudo_prior0->embedded(d1, d1 + d0)});
}

LogDensity joint_with_0_active(const LogDensity& on_theta0, const ModelLink& link, std::size_t d1, std::size_t d0) {
    return product(on_theta0.label(),
                   {link.pseudo_prior1->embedded(0, d1 + d0), on_theta0.embedded(d1, d1 + d0)});
}

ParamVector joint_init(const BayesModel& model1, const BayesModel& model0, const ModelLink& link) {
    return link.shared ? model1.init : concat(model1.init, model0.init);
}

EvalResult evaluate(Path path, const ParamVector& init, const TemperatureSchedule& schedule,
                    const EvalOptions& options) {
    LadderOptions lo = options.ladder;
    if (!lo.init) lo.init = init;
    EvalResult r{{}, {}, {}, path, run_ladder(path, schedule, options.chain, lo), {}};
    r.ti = ti_estimate(r.ladder, options.batches);
    r.ss = ss_estimate(r.ladder, path, options.batches);
    r.estimate = options.method == Method::ti ? r.ti : r.ss;
    return r;
}

const ImportanceDensity& require_g(const ImportanceDensity* g, const char* which) {
    if (!g) throw ConfigError(which, "the IP path needs an importance density");
    return *g;
}

}  // namespace

const char* to_string(Method m) { return m == Method::ti ? "ti" : "ss"; }
const char* to_string(NestedPath p) { return p == NestedPath::pp ? "pp" : "ip"; }

BayesModel BayesModel::from(const RegressionModel& model) {
    return {model.label(), model.log_likelihood(), model.log_prior(), model.default_init()};
}

BayesModel BayesModel::from(const NormalMeanModel& model) {
    return {model.label(), model.log_likelihood(), model.log_prior(), model.default_init()};
}

LogDensity BayesModel::log_posterior_kernel() const {
    return product(label + ":posterior", {log_likelihood, log_prior});
}

void BayesModel::validate() const {
    if (!log_likelihood.valid() || !log_prior.valid()) throw ArgumentError("model_eval", label + ": missing density");
    if (log_likelihood.dim() != log_prior.dim() || init.dim() != log_prior.dim()) {
        throw ArgumentError("model_eval", label + ": likelihood, prior and init dimensions differ");
    }
    if (!std::isfinite(log_prior(init)) || !std::isfinite(log_likelihood(init))) {
        throw SupportError("model_eval", label + ": init outside the support", label);
    }
}

ImportanceDensity build_importance(const ChainOutput& posterior, std::span<const std::size_t> positive_coords,
                                   const std::string& label) {
    if (posterior.size() < kMinImportanceDraws) {
        throw ArgumentError("model_eval", "importance density needs at least 100 posterior draws");
    }
    const std::size_t d = posterior.dim;
    ImportanceDensity g;
    g.mean.assign(d, 0.0);
    g.var.assign(d, 0.0);
    g.log_scale.assign(d, false);
    for (auto k : positive_coords) g.log_scale.at(k) = true;
    const double n = static_cast<double>(posterior.size());
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0, m2 = 0;
        for (std::size_t r = 0; r < posterior.size(); ++r) {
            double x = posterior.sample(r)[k];
            if (g.log_scale[k]) {
                if (!(x > 0)) throw SupportError("model_eval", "non-positive draw of a positive coordinate", label);
                x = std::log(x);
            }
            const double delta = x - mean;
            mean += delta / static_cast<double>(r + 1);
            m2 += delta * (x - mean);
        }
        g.mean[k] = mean;
        g.var[k] = m2 / (n - 1.0);
        if (!(g.var[k] > 0)) {
            throw DegenerateImportanceError("model_eval",
                                            "zero posterior variance in coordinate " + std::to_string(k));
        }
    }
    std::vector<ConjugateTerm> terms;
    for (std::size_t k = 0; k < d; ++k) {
        if (g.log_scale[k]) {
            terms.emplace_back(LogNormalTerm{k, g.mean[k], g.var[k]});
        } else {
            terms.emplace_back(NormalTerm{k, g.mean[k], g.var[k]});
        }
    }
    g.density = LogDensity::from_terms(label, d, std::move(terms));
    return g;
}

ImportanceDensity build_importance(const BayesModel& model, const ChainConfig& cfg, SamplerKind sampler) {
    model.validate();
    const Path path(GeometricPath{model.log_prior, model.log_posterior_kernel()});
    const auto chain = run_chain(TemperedTarget{path, 1.0}, model.init, cfg, sampler);
    return build_importance(chain, path.positive_coords(), model.label + ":importance");
}

EvalResult marginal_pp(const BayesModel& model, const TemperatureSchedule& schedule, const EvalOptions& options) {
    model.validate();
    return evaluate(Path(GeometricPath{model.log_prior, model.log_posterior_kernel()}), model.init, schedule, options);
}

EvalResult marginal_ip(const BayesModel& model, const ImportanceDensity& g, const TemperatureSchedule& schedule,
                       const EvalOptions& options) {
    model.validate();
    if (g.density.dim() != model.dim()) throw ArgumentError("model_eval", "importance density has the wrong dimension");
    auto r = evaluate(Path(GeometricPath{g.density, model.log_posterior_kernel()}), model.init, schedule, options);
    const auto steps = stepping_stone(r.ladder, r.path);
    for (std::size_t i = 0; i < steps.ess_per_step.size(); ++i) {
        const double r_i = static_cast<double>(r.ladder.chains[i].size());
        if (steps.ess_per_step[i] < 0.01 * r_i) {
            r.warnings.push_back("importance weights collapse on panel [" + std::to_string(steps.schedule[i]) + ", " +
                                 std::to_string(steps.schedule[i + 1]) +
                                 "]: g may have thinner tails than the posterior");
        }
    }
    return r;
}

Path ms_path(const BayesModel& model1, const BayesModel& model0, const ModelLink& link) {
    const auto post1 = model1.log_posterior_kernel(), post0 = model0.log_posterior_kernel();
    if (link.shared) {
        if (model1.dim() != model0.dim()) {
            throw ConfigError("parameters", "models with shared parameters must have the same dimension");
        }
        return Path(GeometricPath{post0, post1});
    }
    if (!link.pseudo_prior1 || !link.pseudo_prior0) {
        throw ConfigError("pseudo_priors", "models with different parameter blocks need a pseudo-prior for each block");
    }
    const auto d1 = model1.dim(), d0 = model0.dim();
    return Path(GeometricPath{joint_with_0_active(post0, link, d1, d0), joint_with_1_active(post1, link, d1, d0)});
}

Path quadrivial_path(const BayesModel& model1, const BayesModel& model0, NestedPath nested, const ModelLink& link,
                     const ImportanceDensity* g1, const ImportanceDensity* g0) {
    const auto post1 = model1.log_posterior_kernel(), post0 = model0.log_posterior_kernel();
    const LogDensity ref1 = nested == NestedPath::ip ? require_g(g1, "g1").density : model1.log_prior;
    const LogDensity ref0 = nested == NestedPath::ip ? require_g(g0, "g0").density : model0.log_prior;
    if (link.shared) {
        if (model1.dim() != model0.dim()) {
            throw ConfigError("parameters", "models with shared parameters must have the same dimension");
        }
        return Path(QuadrivialPath{post1, ref1, ref0, post0});
    }
    if (!link.pseudo_prior1 || !link.pseudo_prior0) {
        throw ConfigError("pseudo_priors", "models with different parameter blocks need a pseudo-prior for each block");
    }
    const auto d1 = model1.dim(), d0 = model0.dim();
    return Path(QuadrivialPath{joint_with_1_active(post1, link, d1, d0), joint_with_1_active(ref1, link, d1, d0),
                               joint_with_0_active(ref0, link, d1, d0), joint_with_0_active(post0, link, d1, d0)});
}

EvalResult bayes_factor_ms(const BayesModel& model1, const BayesModel& model0, const ModelLink& link,
                           const TemperatureSchedule& schedule, const EvalOptions& options,
                           const ImportanceDensity* g1, const ImportanceDensity* g0) {
    model1.validate();
    model0.validate();
    const auto resolved = resolve_link(model1, model0, link, g1, g0);
    return evaluate(ms_path(model1, model0, resolved), joint_init(model1, model0, resolved), schedule, options);
}

EvalResult bayes_factor_quadrivial(const BayesModel& model1, const BayesModel& model0, NestedPath nested,
                                   const ModelLink& link, const TemperatureSchedule& schedule,
                                   const EvalOptions& options, const ImportanceDensity* g1,
                                   const ImportanceDensity* g0) {
    model1.validate();
    model0.validate();
    const auto resolved = resolve_link(model1, model0, link, g1, g0);
    return evaluate(quadrivial_path(model1, model0, nested, resolved, g1, g0), joint_init(model1, model0, resolved),
                    schedule, options);
}

SeparateResult bayes_factor_separate(const BayesModel& model1, const BayesModel& model0, NestedPath nested,
                                     const TemperatureSchedule& schedule, const EvalOptions& options,
                                     const ImportanceDensity* g1, const ImportanceDensity* g0) {
    auto run = [&](const BayesModel& m, const ImportanceDensity* g, const char* which) {
        return nested == NestedPath::ip ? marginal_ip(m, require_g(g, which), schedule, options)
                                        : marginal_pp(m, schedule, options);
    };
    SeparateResult r{{}, {}, {}, run(model1, g1, "g1"), run(model0, g0, "g0")};
    auto diff = [](const EstimateWithError& a, const EstimateWithError& b) {
        std::vector<double> v(a.batch_values.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.batch_values[i] - b.batch_values[i];
        auto e = EstimateWithError::from_batches(std::move(v));
        e.value = a.value - b.value;
        return e;
    };
    r.ti = diff(r.model1.ti, r.model0.ti);
    r.ss = diff(r.model1.ss, r.model0.ss);
    r.estimate = options.method == Method::ti ? r.ti : r.ss;
    return r;
}

}  // namespace thermo
