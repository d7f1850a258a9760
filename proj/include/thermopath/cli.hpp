#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermopath/data.hpp"
#include "thermopath/estimate.hpp"
#include "thermopath/models.hpp"
#include "thermopath/oracle.hpp"
#include "thermopath/sampler.hpp"
#include "thermopath/schedules.hpp"

namespace thermo::cli {

struct ModelSpec {
    std::string family;  // regression | normal_mean | gaussian_pair
    std::string label;
    // regression
    std::string prior_name;  // pi1, pi2, pi3 or custom
    RegressionPrior prior;
    // normal_mean
    double sigma2 = 1.0, prior_mean = 0.0, prior_var = 1.0;
    std::string column = "y";
    // gaussian_pair
    GaussianPair pair;
};

struct ScheduleSpec {
    std::string kind = "uniform";  // uniform | powered_fraction | beta_quantile | explicit
    std::size_t n = 100;
    double c = 5.0;
    double a = 0.3;
    std::vector<double> points;
};

// Fully materialised run configuration; every default is explicit.
struct RunConfig {
    std::string command;
    ModelSpec model;
    std::optional<ModelSpec> model0;
    std::string data;  // CSV path as given
    std::filesystem::path data_resolved;
    std::shared_ptr<const RegressionData> regression_data;
    std::vector<double> observations;  // normal_mean
    std::string path = "pp";           // pp | ip | ms | qpp | qip | separate | gaussian_pair
    std::string nested = "pp";         // nested path of the separate route
    std::string parameters = "shared";  // shared | disjoint
    std::string method = "ti";         // ti | ss | both
    ScheduleSpec schedule;
    ChainConfig chain;
    std::string sampler = "auto";  // auto | rwm | gibbs
    BatchSpec batch;
    std::optional<std::vector<double>> init;
    bool warm_start = true;
    std::size_t pilot_iterations = 0;
    double t_star_tol = 1e-3;
    std::size_t t_star_max_extra_runs = 30;
    std::string tsallis = "positive";
    std::string output_dir;
    bool dump_chains = false;
    std::string chains_dir;  // empty: <run dir>/chains
    std::size_t parallel = 1;
};

// Strict parse: unknown keys and constraint violations raise ConfigError
// naming the flat key path (e.g. "schedule.c"). Relative data paths resolve
// against base_dir.
RunConfig parse_config(const nlohmann::json& doc, const std::string& command,
                       const std::filesystem::path& base_dir = ".");
RunConfig parse_config_file(const std::filesystem::path& file, const std::string& command);

// Re-validates after command-line overrides.
void finalize_config(RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
TemperatureSchedule make_schedule(const RunConfig& config);
SamplerKind sampler_kind(const RunConfig& config);

// FNV-1a (64 bit) of the canonical echoed config, as 16 hex digits.
std::string inputs_hash(const RunConfig& config);

// Default output directory: $THERMOPATH_OUT, else ./thermopath-out.
std::filesystem::path default_output_dir();

// Runs a subcommand, writes artifacts and the ledger entry, prints a summary.
// Returns the result document (also written to <run dir>/result.json).
nlohmann::json run(const RunConfig& config, std::ostream& summary);

// Entry point used by the executable; returns the process exit status.
int main(int argc, char** argv);

}  // namespace thermo::cli
