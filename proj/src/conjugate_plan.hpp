#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "thermopath/data.hpp"
#include "thermopath/densities.hpp"

namespace thermo {

struct LogNormalPiece {
    double w, mean, var;
};

// Conditional of a positive coordinate s:
//   s^{-shape_exp} exp(-rate / s) prod_j LN(s; m_j, v_j)^{w_j}
struct ScaleConditional {
    std::size_t coord = 0;
    double shape_exp = 0;  // sum of w (a + 1) over inverse-gamma factors
    double rate = 0;
    std::vector<LogNormalPiece> log_normal;
};

struct NormalConditional {
    std::size_t coord = 0;
    double precision = 0, linear = 0;
};

struct RegressionBlock {
    std::size_t offset = 0;
    std::vector<std::pair<double, const RegressionData*>> likelihood;
    NormalConditional alpha, beta;
    ScaleConditional scale;
};

struct GibbsPlan {
    std::vector<RegressionBlock> blocks;
    std::vector<NormalConditional> normals;
    std::vector<ScaleConditional> scales;
};

// Conditional structure of a conjugate target at one temperature. ArgumentError
// if some active component is opaque or a coordinate's conditional is not of a
// supported family.
GibbsPlan build_plan(const Path& path, double t);

// Posterior precision and linear term of (alpha, beta) given sigma2.
struct BlockGaussian {
    double p11, p12, p22, h1, h2;
};
BlockGaussian block_gaussian(const RegressionBlock& block, double sigma2);

// Log-density of ell = log s under the scale conditional with extra
// inverse-gamma shape/rate contributions; Jacobian included.
double scale_conditional_log_density(const ScaleConditional& c, double shape_exp, double rate, double ell);

}  // namespace thermo
