#include "thermopath/diagnostics.hpp"

#include <cmath>
#include <cstdio>

#include "thermopath/estimators_ss.hpp"

namespace thermo {

GeometryReport secant_slopes(const EtCurve& curve, std::optional<double> log_lambda_hat) {
    GeometryReport g;
    g.v_hat = curve.v_hat;
    const auto& s = curve.schedule;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double dt = s[i + 1] - s[i];
        GeometryPanel p;
        p.t_lo = s[i];
        p.t_hi = s[i + 1];
        p.slope = (curve.e_hat[i + 1] - curve.e_hat[i]) / dt;
        p.j_proxy = p.slope * dt * dt;
        p.v_hat_lo = curve.v_hat[i];
        p.v_hat_hi = curve.v_hat[i + 1];
        g.panels.push_back(p);
    }
    if (log_lambda_hat) g.nti_residual = nti_residual(curve, *log_lambda_hat);
    return g;
}

double nti_residual(const EtCurve& curve, double log_lambda_hat) {
    return nti_partial(kl_t_curve(curve, log_lambda_hat)).back();
}

Diagnosis diagnose(const LadderOutput& ladder, const Path& path, const BatchSpec& spec) {
    Diagnosis d;
    const auto curve = e_hat_curve(ladder);
    d.geometry = secant_slopes(curve, stepping_stone(ladder, path).log_lambda_hat);
    d.residual = batch_means(
        ladder,
        [&](const LadderOutput& b) { return nti_residual(e_hat_curve(b), stepping_stone(b, path).log_lambda_hat); },
        spec);
    for (std::size_t i = 1; i < d.geometry.panels.size(); ++i) {
        if (std::abs(d.geometry.panels[i].slope) > std::abs(d.geometry.panels[d.worst_panel].slope)) d.worst_panel = i;
    }
    d.flagged = std::abs(d.residual.value) > 3.0 * d.residual.mce;
    char buf[256];
    const auto& w = d.geometry.panels[d.worst_panel];
    if (d.flagged) {
        std::snprintf(buf, sizeof buf,
                      "NTI residual %.4g exceeds 3 x MCE (%.3g): schedule refinement recommended near t=%.4g "
                      "(panel [%.4g, %.4g], slope %.4g)",
                      d.residual.value, d.residual.mce, 0.5 * (w.t_lo + w.t_hi), w.t_lo, w.t_hi, w.slope);
    } else {
        std::snprintf(buf, sizeof buf, "NTI residual %.4g within 3 x MCE (%.3g): schedule adequate", d.residual.value,
                      d.residual.mce);
    }
    d.verdict = buf;
    return d;
}

}  // namespace thermo
