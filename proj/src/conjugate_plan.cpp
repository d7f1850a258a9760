#include "conjugate_plan.hpp"

#include <cmath>
#include <map>
#include <string>
#include <variant>

#include "thermopath/errors.hpp"

namespace thermo {

namespace {

[[noreturn]] void unsupported(const std::string& why) {
    throw ArgumentError("sampler", "target is not Gibbs-compatible: " + why);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

GibbsPlan build_plan(const Path& path, double t) {
    const auto& comps = path.components();
    const auto w = path.weights(t);
    const std::size_t d = path.dim();

    std::vector<std::pair<double, const ConjugateTerm*>> active;
    for (std::size_t j = 0; j < comps.size(); ++j) {
        if (w[j] == 0.0) continue;
        if (!comps[j].structured()) unsupported("component '" + comps[j].label() + "' is opaque");
        for (const auto& term : comps[j].terms()) active.emplace_back(w[j], &term);
    }

    enum class Role { none, block_alpha, block_beta, block_scale, normal, scale };
    std::vector<Role> role(d, Role::none);
    std::map<std::size_t, std::size_t> block_of;  // offset -> index into blocks
    GibbsPlan plan;

    for (auto [wt, term] : active) {
        if (const auto* lik = std::get_if<RegressionLikelihoodTerm>(term)) {
            auto [it, fresh] = block_of.try_emplace(lik->offset, plan.blocks.size());
            if (fresh) {
                RegressionBlock b;
                b.offset = lik->offset;
                b.alpha.coord = lik->offset;
                b.beta.coord = lik->offset + 1;
                b.scale.coord = lik->offset + 2;
                for (std::size_t k = 0; k < 3; ++k) {
                    if (role[lik->offset + k] != Role::none) unsupported("overlapping regression blocks");
                }
                role[lik->offset] = Role::block_alpha;
                role[lik->offset + 1] = Role::block_beta;
                role[lik->offset + 2] = Role::block_scale;
                plan.blocks.push_back(b);
            }
            plan.blocks[it->second].likelihood.emplace_back(wt, lik->data.get());
        }
    }

    std::map<std::size_t, std::size_t> normal_of, scale_of;
    auto normal_for = [&](std::size_t k) -> NormalConditional& {
        if (role[k] == Role::block_alpha) {
            for (auto& b : plan.blocks)
                if (b.alpha.coord == k) return b.alpha;
        }
        if (role[k] == Role::block_beta) {
            for (auto& b : plan.blocks)
                if (b.beta.coord == k) return b.beta;
        }
        if (role[k] == Role::none) {
            role[k] = Role::normal;
            normal_of[k] = plan.normals.size();
            plan.normals.push_back({k, 0, 0});
        }
        if (role[k] != Role::normal) unsupported("normal factor on a positive coordinate");
        return plan.normals[normal_of[k]];
    };
    auto scale_for = [&](std::size_t k) -> ScaleConditional& {
        if (role[k] == Role::block_scale) {
            for (auto& b : plan.blocks)
                if (b.scale.coord == k) return b.scale;
        }
        if (role[k] == Role::none) {
            role[k] = Role::scale;
            scale_of[k] = plan.scales.size();
            ScaleConditional s;
            s.coord = k;
            plan.scales.push_back(s);
        }
        if (role[k] != Role::scale) unsupported("scale factor on an unconstrained coordinate");
        return plan.scales[scale_of[k]];
    };

    for (auto [wt, term] : active) {
        std::visit(overloaded{
                       [](const ConstantTerm&) {},
                       [](const RegressionLikelihoodTerm&) {},
                       [&](const NormalTerm& n) {
                           auto& c = normal_for(n.coord);
                           c.precision += wt / n.var;
                           c.linear += wt * n.mean / n.var;
                       },
                       [&](const InverseGammaTerm& g) {
                           auto& c = scale_for(g.coord);
                           c.shape_exp += wt * (g.shape + 1.0);
                           c.rate += wt * g.rate;
                       },
                       [&](const LogNormalTerm& g) { scale_for(g.coord).log_normal.push_back({wt, g.mean, g.var}); },
                   },
                   *term);
    }

    for (std::size_t k = 0; k < d; ++k) {
        if (role[k] == Role::none) unsupported("coordinate " + std::to_string(k) + " has no proper factor");
    }
    for (const auto& n : plan.normals) {
        if (!(n.precision > 0)) unsupported("coordinate " + std::to_string(n.coord) + " has zero precision");
    }
    for (const auto& s : plan.scales) {
        if (s.log_normal.empty() && !(s.shape_exp > 1.0 && s.rate > 0)) {
            unsupported("improper scale conditional at coordinate " + std::to_string(s.coord));
        }
    }
    return plan;
}

BlockGaussian block_gaussian(const RegressionBlock& b, double s2) {
    BlockGaussian g{b.alpha.precision, 0.0, b.beta.precision, b.alpha.linear, b.beta.linear};
    for (auto [w, data] : b.likelihood) {
        const double f = w / s2;
        g.p11 += f * static_cast<double>(data->size());
        g.p22 += f * data->sum_xc_squared();
        g.p12 += f * data->sum_xc();
        g.h1 += f * data->sum_y();
        g.h2 += f * data->sum_xc_y();
    }
    return g;
}

double scale_conditional_log_density(const ScaleConditional& c, double shape_exp, double rate, double ell) {
    // density of ell = log s, Jacobian e^ell included
    double v = -shape_exp * ell - rate * std::exp(-ell) + ell;
    for (const auto& p : c.log_normal) {
        const double dd = ell - p.mean;
        v += p.w * (-0.5 * dd * dd / p.var - ell);
    }
    return v;
}

}  // namespace thermo
