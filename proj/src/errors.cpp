#include "thermopath/errors.hpp"

namespace thermo {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::argument: return "argument";
        case ErrorKind::support: return "support";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::degenerate_path: return "degenerate_path";
        case ErrorKind::degenerate_importance: return "degenerate_importance";
        case ErrorKind::config: return "config";
        case ErrorKind::grid: return "grid";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& what)
    : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::domain:
        case ErrorKind::argument:
            return 2;
        case ErrorKind::support:
        case ErrorKind::numeric:
        case ErrorKind::grid:
        case ErrorKind::degenerate_importance:
            return 3;
        case ErrorKind::degenerate_path:
            return 4;
    }
    return 1;
}

}  // namespace thermo
