#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermo {

enum class ErrorKind {
    domain,
    argument,
    support,
    numeric,
    degenerate_path,
    degenerate_importance,
    config,
    grid,
};

const char* to_string(ErrorKind kind);

// Base exception for every library failure. Carries the originating module and,
// when a sampler run was involved, the temperature and seed of that run.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& what);

    ErrorKind kind() const { return kind_; }
    const std::string& module() const { return module_; }
    std::optional<double> temperature() const { return temperature_; }
    std::optional<std::uint64_t> seed() const { return seed_; }

    Error& with_run(double t, std::uint64_t seed) {
        temperature_ = t;
        seed_ = seed;
        return *this;
    }

private:
    ErrorKind kind_;
    std::string module_;
    std::optional<double> temperature_;
    std::optional<std::uint64_t> seed_;
};

struct DomainError : Error {
    DomainError(std::string module, const std::string& what)
        : Error(ErrorKind::domain, std::move(module), what) {}
};

struct ArgumentError : Error {
    ArgumentError(std::string module, const std::string& what)
        : Error(ErrorKind::argument, std::move(module), what) {}
};

// A density evaluated to -inf where a finite value was required.
struct SupportError : Error {
    SupportError(std::string module, const std::string& what, std::string endpoint)
        : Error(ErrorKind::support, std::move(module), what), endpoint(std::move(endpoint)) {}
    std::string endpoint;
};

// NaN or +inf produced by a density, or -inf after a finite proposal.
struct NumericError : Error {
    NumericError(std::string module, const std::string& what, std::vector<double> theta = {})
        : Error(ErrorKind::numeric, std::move(module), what), theta(std::move(theta)) {}
    std::vector<double> theta;
};

struct DegeneratePathError : Error {
    DegeneratePathError(std::string module, const std::string& what)
        : Error(ErrorKind::degenerate_path, std::move(module), what) {}
};

struct DegenerateImportanceError : Error {
    DegenerateImportanceError(std::string module, const std::string& what)
        : Error(ErrorKind::degenerate_importance, std::move(module), what) {}
};

struct ConfigError : Error {
    ConfigError(std::string key, const std::string& what)
        : Error(ErrorKind::config, "cli", key + ": " + what), key(std::move(key)) {}
    std::string key;
};

struct GridError : Error {
    GridError(std::string module, const std::string& what)
        : Error(ErrorKind::grid, std::move(module), what) {}
};

// Process exit status used by the command-line tool for a given error kind.
int exit_code(ErrorKind kind);

}  // namespace thermo
