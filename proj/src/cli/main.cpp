#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "thermopath/cli.hpp"
#include "thermopath/errors.hpp"

namespace thermo::cli {

using nlohmann::json;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out, path, route, method, dump_chains;
    std::optional<std::size_t> iterations, burn_in, thin, parallel;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

json read_document(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config", "cannot read " + file);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
}

// Command-line flags win over the file; they are written into the document so
// the echoed config records them.
void apply_overrides(json& doc, const Overrides& o) {
    auto set = [&](const char* section, const char* key, const auto& value) {
        if (!value) return;
        if (!doc.contains(section) || !doc[section].is_object()) doc[section] = json::object();
        doc[section][key] = *value;
    };
    set("chain", "iterations", o.iterations);
    set("chain", "burn_in", o.burn_in);
    set("chain", "thin", o.thin);
    set("chain", "seed", o.seed);
    set("output", "dir", o.out);
    set("t_star", "tol", o.tol);
    if (o.dump_chains) {
        set("output", "dump_chains", std::optional<bool>(true));
        if (!o.dump_chains->empty()) set("output", "chains_dir", o.dump_chains);
    }
    if (o.path) doc["path"] = *o.path;
    if (o.route) doc["path"] = *o.route;
    if (o.method) doc["method"] = *o.method;
    if (o.parallel) doc["parallel"] = *o.parallel;
}

json error_json(const std::string& kind, const std::string& module, const std::string& message) {
    return {{"error", {{"kind", kind}, {"module", module}, {"message", message}}}};
}

void add_common(CLI::App& sub, Overrides& o) {
    sub.add_option("-c,--config", o.config, "JSON run configuration")->required();
    sub.add_option("--out", o.out, "output directory (default $THERMOPATH_OUT or ./thermopath-out)");
    sub.add_option("--iterations", o.iterations, "iterations per chain, burn-in included");
    sub.add_option("--burn-in", o.burn_in);
    sub.add_option("--thin", o.thin);
    sub.add_option("--seed", o.seed);
    sub.add_option("--parallel", o.parallel, "worker threads for the ladder");
    sub.add_option("--dump-chains", o.dump_chains, "write one CSV per temperature (optionally under DIR)")
        ->expected(0, 1)
        ->default_str("");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermodynamic integration and stepping-stone estimates of normalising-constant ratios"};
    app.require_subcommand(1);
    Overrides o;
    const std::vector<std::string> methods{"ti", "ss", "both"};

    auto* marginal = app.add_subcommand("marginal", "log marginal likelihood of one model");
    add_common(*marginal, o);
    marginal->add_option("--path", o.path)->check(CLI::IsMember({"pp", "ip"}));
    marginal->add_option("--method", o.method)->check(CLI::IsMember(methods));

    auto* bf = app.add_subcommand("bayes-factor", "log Bayes factor of model over model0");
    add_common(*bf, o);
    bf->add_option("--route", o.route)->check(CLI::IsMember({"ms", "qpp", "qip", "separate"}));
    bf->add_option("--method", o.method)->check(CLI::IsMember(methods));

    for (const char* name : {"divergences", "chernoff"}) {
        auto* sub = app.add_subcommand(name, name == std::string("chernoff") ? "Chernoff information and t*"
                                                                              : "divergence report between the path ends");
        add_common(*sub, o);
        sub->add_option("--path", o.path);
        sub->add_option("--tol", o.tol, "t* tolerance");
    }
    auto* diag = app.add_subcommand("diagnose", "TI/SS residual and per-panel geometry");
    add_common(*diag, o);
    diag->add_option("--path", o.path);
    auto* oracle = app.add_subcommand("oracle", "exact divergences by closed form or quadrature");
    add_common(*oracle, o);
    oracle->add_option("--path", o.path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_code(ErrorKind::config);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        json doc = read_document(o.config);
        apply_overrides(doc, o);
        const std::filesystem::path file(o.config);
        const auto config = parse_config(doc, command, file.parent_path().empty() ? "." : file.parent_path());
        run(config, std::cout);
        return 0;
    } catch (const Error& e) {
        auto report = error_json(to_string(e.kind()), e.module(), e.what());
        if (e.temperature()) report["error"]["temperature"] = *e.temperature();
        if (e.seed()) report["error"]["seed"] = *e.seed();
        if (const auto* c = dynamic_cast<const ConfigError*>(&e)) report["error"]["key"] = c->key;
        std::cerr << report.dump() << std::endl;
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << error_json("internal", "cli", e.what()).dump() << std::endl;
        return 1;
    }
}

}  // namespace thermo::cli
