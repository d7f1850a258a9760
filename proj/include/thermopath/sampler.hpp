#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "thermopath/densities.hpp"
#include "thermopath/models.hpp"
#include "thermopath/schedules.hpp"

namespace thermo {

struct ChainConfig {
    std::size_t iterations = 35000;  // including burn-in
    std::size_t burn_in = 5000;
    std::size_t thin = 1;
    std::uint64_t seed = 20131015;
    // Random-walk proposal scale per coordinate (on the log scale for positive
    // coordinates). Empty means 1 for every coordinate.
    std::vector<double> step_scale;
    bool adapt = true;

    std::size_t retained() const { return iterations > burn_in ? (iterations - burn_in) / thin : 0; }
    void validate() const;
};

struct ChainOutput {
    double t = 0;
    std::size_t dim = 0;
    std::vector<double> samples;  // row-major, retained x dim
    std::vector<double> u_values;
    double acceptance_rate = 1;
    std::uint64_t seed_used = 0;
    // Where the chain stopped and the proposal scale it ended with; used to
    // warm-start neighbouring temperatures.
    std::vector<double> final_state;
    std::vector<double> final_step_scale;

    std::size_t size() const { return u_values.size(); }
    std::span<const double> sample(std::size_t r) const { return {samples.data() + r * dim, dim}; }
    // Retained draws [begin, end) as a chain of its own.
    ChainOutput slice(std::size_t begin, std::size_t end) const;
};

struct LadderOutput {
    TemperatureSchedule schedule;
    std::vector<ChainOutput> chains;

    const ChainOutput& at(double t) const;
    bool has(double t) const { return schedule.index_of(t) != TemperatureSchedule::npos; }
    // Smallest retained length over all non-empty chains.
    std::size_t min_size() const;
    // Batch b (of size batch_size) of every chain, paired by index. Empty
    // chains stay empty.
    LadderOutput batch(std::size_t b, std::size_t batch_size) const;
    // Adds a run at a new temperature, keeping chains ordered by t.
    void insert(ChainOutput chain);
};

// Unnormalised sampling target p_t: the path evaluated at a fixed temperature.
struct TemperedTarget {
    Path path;
    double t;
};

enum class SamplerKind { automatic, rwm, gibbs };

struct LadderOptions {
    // Initial state of the first chain (and of every chain without warm start).
    std::optional<ParamVector> init;
    // Start each chain where a short pilot run at the previous temperature ended.
    bool warm_start = true;
    // Pilot length per temperature; 0 picks min(burn_in, 1000).
    std::size_t pilot_iterations = 0;
    std::size_t workers = 1;
    SamplerKind sampler = SamplerKind::automatic;
};

// Seed of chain `index` derived from the base seed with a SplitMix64 finaliser.
std::uint64_t chain_seed(std::uint64_t base, std::uint64_t index);

// Gaussian random-walk Metropolis on p_t. Positive coordinates move on the log
// scale (Jacobian included). With cfg.adapt the proposal scale is tuned during
// burn-in towards acceptance 0.44 (d = 1) or 0.234 (d > 1) and then frozen.
ChainOutput rwm_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg);

// Block Gibbs sampler for targets whose active components are all built from
// conjugate terms: (alpha, beta) | sigma2 is bivariate normal, sigma2 | (alpha,
// beta) is inverse gamma (slice-sampled on the log scale when log-normal
// factors are present), free normal coordinates are drawn exactly.
ChainOutput gibbs_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg);
bool gibbs_supported(const Path& path);

// The tempered regression posterior f(y | theta)^t pi(theta); u_values hold
// log f(y | theta).
ChainOutput gibbs_regression_chain(const RegressionModel& model, double t, const ChainConfig& cfg);

ChainOutput run_chain(const TemperedTarget& target, const ParamVector& init, const ChainConfig& cfg,
                      SamplerKind kind = SamplerKind::automatic);

// One independent chain per schedule point. Chain i uses chain_seed(cfg.seed, i);
// the output is identical for any worker count.
LadderOutput run_ladder(const Path& path, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                        const LadderOptions& options = {});
// Prior-posterior path of a regression model.
LadderOutput run_ladder(const RegressionModel& model, const TemperatureSchedule& schedule, const ChainConfig& cfg,
                        LadderOptions options = {});

// Extra run at a temperature not yet in the ladder, warm-started from the
// nearest lower chain. Seeded with chain_seed(cfg.seed, seed_index).
ChainOutput extend_ladder(LadderOutput& ladder, const Path& path, double t, const ChainConfig& cfg,
                          std::uint64_t seed_index, SamplerKind kind = SamplerKind::automatic);

}  // namespace thermo
