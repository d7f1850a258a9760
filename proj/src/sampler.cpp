#include "thermopath/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "conjugate_plan.hpp"
#include "thermopath/errors.hpp"

namespace thermo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kPilotSalt = 0x9e3779b97f4a7c15ULL;

using Rng = std::mt19937_64;

void record_u_values(ChainOutput& out, const TemperedTarget& target) {
    out.u_values.resize(out.samples.size() / out.dim);
    for (std::size_t r = 0; r < out.u_values.size(); ++r) out.u_values[r] = target.path.u(out.sample(r), target.t);
}

double draw_scale(const ScaleConditional& c, double extra_shape, double extra_rate, double current, Rng& rng) {
    const double shape_exp = c.shape_exp + extra_shape;
    const double rate = c.rate + extra_rate;
    if (c.log_normal.empty()) {
        if (!(shape_exp > 1.0) || !(rate > 0)) {
            throw NumericError("sampler", "improper inverse-gamma conditional");
        }
        std::gamma_distribution<double> gamma(shape_exp - 1.0, 1.0 / rate);
        double g = gamma(rng);
        if (!(g > 0)) g = std::numeric_limits<double>::min();
        return 1.0 / g;
    }
    // Slice sampler on ell = log s with stepping out.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const double x0 = std::log(current);
    const double level = scale_conditional_log_density(c, shape_exp, rate, x0) - expo(rng);
    const double width = 1.0;
    double lo = x0 - width * unif(rng);
    double hi = lo + width;
    for (int i = 0; i < 200 && scale_conditional_log_density(c, shape_exp, rate, lo) > level; ++i) lo -= width;
    for (int i = 0; i < 200 && scale_conditional_log_density(c, shape_exp, rate, hi) > level; ++i) hi += width;
    for (int i = 0; i < 1000; ++i) {
        const double x1 = lo + (hi - lo) * unif(rng);
        if (scale_conditional_log_density(c, shape_exp, rate, x1) > level) return std::exp(x1);
        (x1 < x0 ? lo : hi) = x1;
    }
    return current;
}

void draw_normal(const NormalConditional& c, std::vector<double>& theta, Rng& rng) {
    std::normal_distribution<double> normal;
    theta[c.coord] = c.linear / c.precision + normal(rng) / std::sqrt(c.precision);
}

void draw_block(const RegressionBlock& b, std::vector<double>& theta, Rng& rng) {
    std::normal_distribution<double> normal;
    const std::size_t o = b.offset;
    const double s2 = theta[o + 2];
    const auto [p11, p12, p22, h1, h2] = block_gaussian(b, s2);
    const double l11 = std::sqrt(p11);
    const double l21 = p12 / l11;
    const double l22 = std::sqrt(p22 - l21 * l21);
    // mean = P^{-1} h via the Cholesky factor
    const double y1 = h1 / l11;
    const double y2 = (h2 - l21 * y1) / l22;
    const double m2 = y2 / l22;
    const double m1 = (y1 - l21 * m2) / l11;
    const double z1 = normal(rng), z2 = normal(rng);
    const double e2 = z2 / l22;
    const double e1 = (z1 - l21 * e2) / l11;
    theta[o] = m1 + e1;
    theta[o + 1] = m2 + e2;

    double extra_shape = 0, extra_rate = 0;
    for (auto [w, data] : b.likelihood) {
        extra_shape += w * 0.5 * static_cast<double>(data->size());
        extra_rate += w * 0.5 * data->ssr(theta[o], theta[o + 1]);
    }
    theta[o + 2] = draw_scale(b.scale, extra_shape, extra_rate, s2, rng);
}

}  // namespace

void ChainConfig::validate() const {
    if (iterations == 0) throw ArgumentError("sampler", "iterations must be positive");
    if (burn_in >= iterations) throw ArgumentError("sampler", "burn_in must be smaller than iterations");
    if (thin == 0) throw ArgumentError("sampler", "thin must be positive");
    if (retained() < 2) throw ArgumentError("sampler", "chain must retain at least 2 samples");
    for (double s : step_scale) {
        if (!(s > 0) || !std::isfinite(s)) throw ArgumentError("sampler", "step scales must be positive");
    }
}

ChainOutput ChainOutput::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw ArgumentError("sampler", "chain slice out of range");
    ChainOutput out;
    out.t = t;
    out.dim = dim;
    out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin * dim),
                       samples.begin() + static_cast<std::ptrdiff_t>(end * dim));
    out.u_values.assign(u_values.begin() + static_cast<std::ptrdiff_t>(begin),
                        u_values.begin() + static_cast<std::ptrdiff_t>(end));
    out.acceptance_rate = acceptance_rate;
    out.seed_used = seed_used;
    return out;
}

const ChainOutput& LadderOutput::at(double t) const {
    const auto i = schedule.index_of(t);
    if (i == TemperatureSchedule::npos) {
        throw ArgumentError("sampler", "ladder has no run at t = " + std::to_string(t));
    }
    return chains[i];
}

std::size_t LadderOutput::min_size() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (const auto& c : chains)
        if (c.size() > 0) m = std::min(m, c.size());
    return m == std::numeric_limits<std::size_t>::max() ? 0 : m;
}

LadderOutput LadderOutput::batch(std::size_t b, std::size_t batch_size) const {
    LadderOutput out{schedule, {}};
    out.chains.reserve(chains.size());
    for (const auto& c : chains) {
        out.chains.push_back(c.size() == 0 ? c : c.slice(b * batch_size, (b + 1) * batch_size));
    }
    return out;
}

void LadderOutput::insert(ChainOutput chain) {
    if (has(chain.t)) throw ArgumentError("sampler", "ladder already has a run at t = " + std::to_string(chain.t));
    check_temperature(chain.t, "sampler");
    std::vector<double> points(schedule.points().begin(), schedule.points().end());
    auto pos = std::upper_bound(points.begin(), points.end(), chain.t) - points.begin();
    points.insert(points.begin() + pos, chain.t);
    schedule = TemperatureSchedule(std::move(points), ScheduleKind::refined);
    chains.insert(chains.begin() + pos, std::move(chain));
}

std::uint64_t chain_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ChainOutput rwm_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg) {
    cfg.validate();
    check_temperature(target.t, "sampler");
    const std::size_t d = target.path.dim();
    if (init.dim() != d) throw ArgumentError("sampler", "initial state has the wrong dimension");
    if (!cfg.step_scale.empty() && cfg.step_scale.size() != d) {
        throw ArgumentError("sampler", "step_scale must have one entry per coordinate");
    }

    std::vector<bool> positive(d, false);
    for (auto k : target.path.positive_coords()) positive[k] = true;

    std::vector<double> z(d), theta(d);
    for (std::size_t k = 0; k < d; ++k) {
        if (positive[k]) {
            if (!(init[k] > 0)) throw SupportError("sampler", "initial state outside the support", "init");
            z[k] = std::log(init[k]);
        } else {
            z[k] = init[k];
        }
    }
    auto log_target = [&](const std::vector<double>& zz) {
        double jac = 0;
        for (std::size_t k = 0; k < d; ++k) {
            if (positive[k]) {
                theta[k] = std::exp(zz[k]);
                jac += zz[k];
                if (!(theta[k] > 0) || !std::isfinite(theta[k])) return kNegInf;
            } else {
                theta[k] = zz[k];
            }
        }
        const double lp = target.path.log_q(theta, target.t);
        return lp == kNegInf ? kNegInf : lp + jac;
    };

    double current = log_target(z);
    if (current == kNegInf) throw SupportError("sampler", "initial state outside the support of p_t", "init");

    std::vector<double> scale = cfg.step_scale.empty() ? std::vector<double>(d, 1.0) : cfg.step_scale;
    const double target_rate = d == 1 ? 0.44 : 0.234;
    const std::size_t window = 50;
    const bool rescale = cfg.adapt && cfg.burn_in >= 400;
    const std::size_t collect_from = cfg.burn_in / 4, collect_to = cfg.burn_in / 2;

    Rng rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ChainOutput out;
    out.t = target.t;
    out.dim = d;
    out.seed_used = cfg.seed;
    out.samples.reserve(cfg.retained() * d);

    std::vector<double> proposal(d), mean(d, 0.0), m2(d, 0.0);
    std::size_t collected = 0, accepted_window = 0, windows = 0, accepted_after = 0;
    double log_global = 0.0;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const double global = std::exp(log_global);
        for (std::size_t k = 0; k < d; ++k) proposal[k] = z[k] + global * scale[k] * normal(rng);
        const double lp = log_target(proposal);
        const bool accept = lp != kNegInf && std::log(unif(rng)) < lp - current;
        if (accept) {
            z.swap(proposal);
            current = lp;
        }

        if (it < cfg.burn_in) {
            if (cfg.adapt) {
                accepted_window += accept ? 1 : 0;
                if ((it + 1) % window == 0) {
                    ++windows;
                    const double rate = static_cast<double>(accepted_window) / window;
                    log_global += std::min(1.0, 3.0 / std::sqrt(static_cast<double>(windows))) * (rate - target_rate);
                    accepted_window = 0;
                }
            }
            if (rescale && it >= collect_from && it < collect_to) {
                ++collected;
                for (std::size_t k = 0; k < d; ++k) {
                    const double delta = z[k] - mean[k];
                    mean[k] += delta / static_cast<double>(collected);
                    m2[k] += delta * (z[k] - mean[k]);
                }
            }
            if (rescale && it + 1 == collect_to && collected > 1) {
                for (std::size_t k = 0; k < d; ++k) {
                    const double sd = std::sqrt(m2[k] / static_cast<double>(collected - 1));
                    if (sd > 0 && std::isfinite(sd)) scale[k] = sd;
                }
                log_global = std::log(2.38 / std::sqrt(static_cast<double>(d)));
                windows = 0;
            }
            continue;
        }
        accepted_after += accept ? 1 : 0;
        if ((it - cfg.burn_in + 1) % cfg.thin == 0) {
            for (std::size_t k = 0; k < d; ++k) out.samples.push_back(positive[k] ? std::exp(z[k]) : z[k]);
        }
    }

    out.acceptance_rate = static_cast<double>(accepted_after) / static_cast<double>(cfg.iterations - cfg.burn_in);
    out.final_state.resize(d);
    for (std::size_t k = 0; k < d; ++k) out.final_state[k] = positive[k] ? std::exp(z[k]) : z[k];
    out.final_step_scale.resize(d);
    for (std::size_t k = 0; k < d; ++k) out.final_step_scale[k] = scale[k] * std::exp(log_global);
    record_u_values(out, target);
    return out;
}

bool gibbs_supported(const Path& path) {
    return std::all_of(path.components().begin(), path.components().end(),
                       [](const LogDensity& c) { return c.structured(); });
}

ChainOutput gibbs_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg) {
    cfg.validate();
    check_temperature(target.t, "sampler");
    const std::size_t d = target.path.dim();
    if (init.dim() != d) throw ArgumentError("sampler", "initial state has the wrong dimension");
    const GibbsPlan plan = build_plan(target.path, target.t);

    std::vector<double> theta(init.values().begin(), init.values().end());
    for (const auto& b : plan.blocks) {
        if (!(theta[b.offset + 2] > 0)) throw SupportError("sampler", "initial variance must be positive", "init");
    }
    for (const auto& s : plan.scales) {
        if (!(theta[s.coord] > 0)) throw SupportError("sampler", "initial scale must be positive", "init");
    }

    Rng rng(cfg.seed);
    ChainOutput out;
    out.t = target.t;
    out.dim = d;
    out.seed_used = cfg.seed;
    out.samples.reserve(cfg.retained() * d);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (const auto& b : plan.blocks) draw_block(b, theta, rng);
        for (const auto& n : plan.normals) draw_normal(n, theta, rng);
        for (const auto& s : plan.scales) theta[s.coord] = draw_scale(s, 0.0, 0.0, theta[s.coord], rng);
        if (it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0) {
            out.samples.insert(out.samples.end(), theta.begin(), theta.end());
        }
    }
    out.acceptance_rate = 1.0;
    out.final_state = theta;
    out.final_step_scale = cfg.step_scale;
    record_u_values(out, target);
    return out;
}

ChainOutput gibbs_regression_chain(const RegressionModel& model, double t, const ChainConfig& cfg) {
    check_temperature(t, "sampler");
    const Path path(GeometricPath{model.log_prior(), model.log_posterior_kernel()});
    return gibbs_chain(TemperedTarget{path, t}, model.default_init(), cfg);
}

ChainOutput run_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg,
                      SamplerKind kind) {
    try {
        if (kind == SamplerKind::gibbs || (kind == SamplerKind::automatic && gibbs_supported(target.path))) {
            return gibbs_chain(target, init, cfg);
        }
        return rwm_chain(target, init, cfg);
    } catch (Error& e) {
        e.with_run(target.t, cfg.seed);
        throw;
    }
}

LadderOutput run_ladder(const Path& path, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                        const LadderOptions& options) {
    cfg.validate();
    if (!options.init) throw ArgumentError("sampler", "run_ladder needs an initial state");
    const std::size_t m = schedule.size();

    std::vector<ParamVector> starts(m, *options.init);
    std::vector<std::vector<double>> scales(m, cfg.step_scale);
    if (options.warm_start) {
        const std::size_t pilot = options.pilot_iterations ? options.pilot_iterations : std::min<std::size_t>(
                                                                                          std::max<std::size_t>(cfg.burn_in, 2), 1000);
        ParamVector state = *options.init;
        std::vector<double> step = cfg.step_scale;
        for (std::size_t i = 0; i < m; ++i) {
            ChainConfig pc = cfg;
            pc.iterations = pilot + 2;
            pc.burn_in = pilot;
            pc.thin = 1;
            pc.seed = chain_seed(cfg.seed ^ kPilotSalt, i);
            pc.step_scale = step;
            const auto run = run_chain(TemperedTarget{path, schedule[i]}, state, pc, options.sampler);
            state = ParamVector(run.final_state);
            if (!run.final_step_scale.empty()) step = run.final_step_scale;
            starts[i] = state;
            scales[i] = step;
        }
    }

    LadderOutput ladder{schedule, std::vector<ChainOutput>(m)};
    std::vector<std::exception_ptr> errors(m);
    auto work = [&](std::size_t i) {
        try {
            ChainConfig ci = cfg;
            ci.seed = chain_seed(cfg.seed, i);
            ci.step_scale = scales[i];
            ladder.chains[i] = run_chain(TemperedTarget{path, schedule[i]}, starts[i], ci, options.sampler);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, m));
    if (workers == 1) {
        for (std::size_t i = 0; i < m; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < m; i = next++) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return ladder;
}

LadderOutput run_ladder(const RegressionModel& model, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                        LadderOptions options) {
    if (!options.init) options.init = model.default_init();
    return run_ladder(Path(GeometricPath{model.log_prior(), model.log_posterior_kernel()}), schedule, cfg, options);
}

ChainOutput extend_ladder(LadderOutput& ladder, const Path& path, double t, const ChainConfig& cfg,
                          std::uint64_t seed_index, SamplerKind kind) {
    check_temperature(t, "sampler");
    if (ladder.chains.empty()) throw ArgumentError("sampler", "cannot extend an empty ladder");
    const auto pts = ladder.schedule.points();
    auto pos = static_cast<std::size_t>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
    const auto& neighbour = ladder.chains[pos == 0 ? 0 : pos - 1];
    ChainConfig ci = cfg;
    ci.seed = chain_seed(cfg.seed, seed_index);
    if (!neighbour.final_step_scale.empty()) ci.step_scale = neighbour.final_step_scale;
    auto chain = run_chain(TemperedTarget{path, t}, ParamVector(neighbour.final_state), ci, kind);
    ladder.insert(chain);
    return chain;
}

}  // namespace thermo
