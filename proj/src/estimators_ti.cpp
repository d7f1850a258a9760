#include "thermopath/estimators_ti.hpp"

#include <algorithm>
#include <cmath>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Index of the last schedule point <= t.
std::size_t panel_of(const TemperatureSchedule& s, double t) {
    const auto pts = s.points();
    auto it = std::upper_bound(pts.begin(), pts.end(), t);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - pts.begin()) - 1));
}

EstimateWithError derived(const EstimateWithError& base, const std::function<double(double)>& f) {
    std::vector<double> values;
    values.reserve(base.batch_values.size());
    for (double v : base.batch_values) values.push_back(f(v));
    EstimateWithError e = values.empty() ? EstimateWithError::exact(0.0) : EstimateWithError::from_batches(values);
    e.value = f(base.value);
    return e;
}

EstimateWithError sum_of(const EstimateWithError& a, const EstimateWithError& b) {
    std::vector<double> values(a.batch_values.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = a.batch_values[i] + b.batch_values[i];
    EstimateWithError e = values.empty() ? EstimateWithError::exact(0.0) : EstimateWithError::from_batches(values);
    e.value = a.value + b.value;
    return e;
}

void check_interior(double t, const char* what) {
    if (!(t > 0.0 && t < 1.0)) {
        throw ArgumentError("estimators_ti", std::string(what) + " must lie strictly inside (0, 1)");
    }
}

struct Bracket {
    std::size_t k = 0;  // sign change between points k and k + 1
    std::size_t misclassified = 0;
};

Bracket best_split(const std::vector<double>& kl) {
    const std::size_t n = kl.size();
    if (!(kl.front() < 0.0) || !(kl.back() > 0.0)) {
        throw DegeneratePathError("estimators_ti", "the KL curve has no sign change on [0, 1]");
    }
    // errors(k) = #{i <= k : kl >= 0} + #{i > k : kl <= 0}
    std::size_t pos_left = 0, nonpos_right = 0;
    for (double v : kl) nonpos_right += v <= 0.0 ? 1 : 0;
    Bracket best{0, n + 1};
    for (std::size_t k = 0; k + 1 < n; ++k) {
        pos_left += kl[k] >= 0.0 ? 1 : 0;
        nonpos_right -= kl[k] <= 0.0 ? 1 : 0;
        if (pos_left + nonpos_right < best.misclassified) best = {k, pos_left + nonpos_right};
    }
    return best;
}

}  // namespace

EtCurve e_hat_curve(const LadderOutput& ladder) {
    EtCurve c{ladder.schedule, {}, {}, {}};
    if (ladder.chains.size() != ladder.schedule.size()) {
        throw ArgumentError("estimators_ti", "ladder has a different number of chains and temperatures");
    }
    for (const auto& chain : ladder.chains) {
        const auto& u = chain.u_values;
        if (u.size() < 2) {
            throw ArgumentError("estimators_ti", "chain at t = " + std::to_string(chain.t) + " has fewer than 2 samples");
        }
        const double n = static_cast<double>(u.size());
        double mean = 0;
        for (double x : u) mean += x;
        mean /= n;
        double ss = 0;
        for (double x : u) ss += (x - mean) * (x - mean);
        c.e_hat.push_back(mean);
        c.v_hat.push_back(ss / (n - 1.0));
        c.r.push_back(u.size());
    }
    return c;
}

double ti_trapezoid(const EtCurve& curve) {
    const auto& t = curve.schedule;
    double sum = 0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) sum += (t[i + 1] - t[i]) * 0.5 * (curve.e_hat[i + 1] + curve.e_hat[i]);
    return sum;
}

EstimateWithError ti_estimate(const LadderOutput& ladder, const BatchSpec& spec) {
    return batch_means(ladder, [](const LadderOutput& b) { return ti_trapezoid(e_hat_curve(b)); }, spec);
}

KlTCurve kl_t_curve(const EtCurve& curve, double log_lambda_hat) {
    KlTCurve k{curve.schedule, curve.e_hat, log_lambda_hat};
    for (double& v : k.kl_t_hat) v -= log_lambda_hat;
    return k;
}

std::vector<double> nti_partial(const KlTCurve& curve) {
    const auto& t = curve.schedule;
    std::vector<double> partial(t.size(), 0.0);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        partial[i + 1] = partial[i] + (t[i + 1] - t[i]) * 0.5 * (curve.kl_t_hat[i + 1] + curve.kl_t_hat[i]);
    }
    return partial;
}

double nti_at(const KlTCurve& curve, double t) {
    check_temperature(t, "estimators_ti");
    const auto partial = nti_partial(curve);
    const auto& s = curve.schedule;
    const std::size_t i = panel_of(s, t);
    if (i + 1 == s.size()) return partial[i];
    const double dt = t - s[i];
    const double frac = dt / (s[i + 1] - s[i]);
    const double kl_t = curve.kl_t_hat[i] + frac * (curve.kl_t_hat[i + 1] - curve.kl_t_hat[i]);
    return partial[i] + dt * 0.5 * (curve.kl_t_hat[i] + kl_t);
}

TStarResult estimate_t_star(const Path& path, LadderOutput ladder, const ChainConfig& cfg, const TStarOptions& options) {
    if (!(options.tol > 0)) throw ArgumentError("estimators_ti", "t* tolerance must be positive");
    TStarResult result;
    bool warned_order = false;
    for (;;) {
        const auto curve = e_hat_curve(ladder);
        result.log_lambda_hat = ti_trapezoid(curve);
        const auto kl = kl_t_curve(curve, result.log_lambda_hat);
        const auto split = best_split(kl.kl_t_hat);
        if (split.misclassified > 0 && !warned_order) {
            result.warnings.push_back("KL curve is not monotone in t: " + std::to_string(split.misclassified) +
                                      " schedule point(s) have the unexpected sign");
            warned_order = true;
        }
        const std::size_t k = split.k;
        result.lo = ladder.schedule[k];
        result.hi = ladder.schedule[k + 1];
        if (result.hi - result.lo <= options.tol) {
            auto risk = [&](std::size_t i) {
                const double se = batch_standard_error(ladder.chains[i].u_values, options.batches_for_sign_risk);
                return se > 0 ? normal_tail(std::abs(kl.kl_t_hat[i]) / se) : 0.0;
            };
            result.sign_risk_lo = risk(k);
            result.sign_risk_hi = risk(k + 1);
            break;
        }
        if (result.extra_runs >= options.max_extra_runs) {
            result.warnings.push_back("t* bracket width " + std::to_string(result.hi - result.lo) +
                                      " still above tolerance after " + std::to_string(result.extra_runs) +
                                      " extra runs");
            break;
        }
        const double mid = 0.5 * (result.lo + result.hi);
        extend_ladder(ladder, path, mid, cfg, options.seed_offset + result.extra_runs, options.sampler);
        ++result.extra_runs;
    }
    result.t_star = 0.5 * (result.lo + result.hi);
    result.half_width = 0.5 * (result.hi - result.lo);
    result.ladder = std::move(ladder);
    return result;
}

TStarResult estimate_t_star(const Path& path, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                            const LadderOptions& ladder_options, const TStarOptions& options) {
    return estimate_t_star(path, run_ladder(path, schedule, cfg, ladder_options), cfg, options);
}

EstimateWithError chernoff_information(const LadderOutput& ladder, double t_star, std::optional<double> log_lambda_hat,
                                       const BatchSpec& spec) {
    check_interior(t_star, "t*");
    return batch_means(
        ladder,
        [&](const LadderOutput& b) {
            const auto curve = e_hat_curve(b);
            const auto kl = kl_t_curve(curve, log_lambda_hat.value_or(ti_trapezoid(curve)));
            return -nti_partial(kl)[panel_of(kl.schedule, t_star)];
        },
        spec);
}

EstimateWithError chernoff_t_divergence(const LadderOutput& ladder, double t, std::optional<double> log_lambda_hat,
                                        const BatchSpec& spec) {
    check_temperature(t, "estimators_ti");
    return batch_means(
        ladder,
        [&](const LadderOutput& b) {
            const auto curve = e_hat_curve(b);
            return -nti_at(kl_t_curve(curve, log_lambda_hat.value_or(ti_trapezoid(curve))), t);
        },
        spec);
}

DivergenceReport divergence_report(const LadderOutput& ladder, double t_star, std::optional<double> log_lambda_hat,
                                   const BatchSpec& spec, TsallisSign tsallis) {
    std::string missing;
    for (double t : {0.0, 1.0}) {
        if (!ladder.has(t)) missing += (missing.empty() ? "t = " : ", t = ") + std::to_string(t);
    }
    if (!missing.empty()) throw ArgumentError("estimators_ti", "divergence report needs runs at " + missing);
    check_interior(t_star, "t*");

    const auto parts = batch_means_multi(
        ladder,
        [&](const LadderOutput& b) {
            const auto curve = e_hat_curve(b);
            const double ll = log_lambda_hat.value_or(ti_trapezoid(curve));
            const auto kl = kl_t_curve(curve, ll);
            const auto partial = nti_partial(kl);
            return std::vector<double>{ll, kl.kl_t_hat.back(), -kl.kl_t_hat.front(), -nti_at(kl, 0.5),
                                       -partial[panel_of(kl.schedule, t_star)]};
        },
        spec);

    DivergenceReport r;
    r.log_lambda = parts[0];
    r.kl_1_0 = parts[1];
    r.kl_0_1 = parts[2];
    r.j = sum_of(r.kl_1_0, r.kl_0_1);
    r.bhattacharyya = parts[3];
    r.hellinger = derived(r.bhattacharyya, [](double bh) { return std::sqrt(std::max(0.0, -std::expm1(-bh))); });
    r.chernoff_info = parts[4];
    r.t_star = t_star;
    r.renyi_at_t_star = derived(r.chernoff_info, [&](double c) { return c / (1.0 - t_star); });
    const double sign = tsallis == TsallisSign::positive ? 1.0 : -1.0;
    r.tsallis_at_t_star = derived(r.chernoff_info, [&](double c) { return -sign * std::expm1(-c) / (1.0 - t_star); });
    return r;
}

}  // namespace thermo
