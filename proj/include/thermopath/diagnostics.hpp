#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermopath/estimate.hpp"
#include "thermopath/estimators_ti.hpp"

namespace thermo {

struct GeometryPanel {
    double t_lo = 0, t_hi = 0;
    // (e_hat[i+1] - e_hat[i]) / dt
    double slope = 0;
    // J-divergence between neighbouring tempered densities, slope * dt^2
    double j_proxy = 0;
    double v_hat_lo = 0, v_hat_hi = 0;
};

struct GeometryReport {
    std::vector<GeometryPanel> panels;
    std::vector<double> v_hat;
    double nti_residual = 0;
};

// Per-panel secant slopes of the E_t curve next to the local variances.
// nti_residual is filled in when a log-ratio estimate is supplied.
GeometryReport secant_slopes(const EtCurve& curve, std::optional<double> log_lambda_hat = std::nullopt);

// Trapezoid integral of the KL curve over [0, 1]; zero for exact integration.
double nti_residual(const EtCurve& curve, double log_lambda_hat);

struct Diagnosis {
    GeometryReport geometry;
    // NTI residual with the stepping-stone log-ratio, i.e. TI minus SS, and its
    // paired batch-means error.
    EstimateWithError residual;
    bool flagged = false;
    std::size_t worst_panel = 0;
    std::string verdict;
};

// Flags a schedule whose NTI residual exceeds 3 times its Monte Carlo error
// and names the panel with the steepest secant.
Diagnosis diagnose(const LadderOutput& ladder, const Path& path, const BatchSpec& spec = {});

}  // namespace thermo
