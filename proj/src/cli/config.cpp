#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "thermopath/cli.hpp"
#include "thermopath/errors.hpp"

namespace thermo::cli {

using nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "must be an object");
    }

    std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }
    // An explicit null (as written by to_json for unset options) counts as absent.
    bool has(const std::string& k) {
        if (!j_.contains(k)) return false;
        if (j_.at(k).is_null()) {
            seen_.insert(k);
            return false;
        }
        return true;
    }

    const json& at(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    std::string str(const std::string& k, const std::string& def) {
        if (!has(k)) {
            seen(k);
            return def;
        }
        const auto& v = at(k);
        if (!v.is_string()) throw ConfigError(key(k), "must be a string");
        return v.get<std::string>();
    }

    double num(const std::string& k, double def) {
        if (!has(k)) {
            seen(k);
            return def;
        }
        const auto& v = at(k);
        if (!v.is_number()) throw ConfigError(key(k), "must be a number");
        return v.get<double>();
    }

    std::size_t count(const std::string& k, std::size_t def) {
        if (!has(k)) {
            seen(k);
            return def;
        }
        const auto& v = at(k);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw ConfigError(key(k), "must be a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    std::uint64_t u64(const std::string& k, std::uint64_t def) {
        if (!has(k)) {
            seen(k);
            return def;
        }
        const auto& v = at(k);
        if (!v.is_number_unsigned()) throw ConfigError(key(k), "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool flag(const std::string& k, bool def) {
        if (!has(k)) {
            seen(k);
            return def;
        }
        const auto& v = at(k);
        if (!v.is_boolean()) throw ConfigError(key(k), "must be true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& k) {
        const auto& v = at(k);
        if (!v.is_array()) throw ConfigError(key(k), "must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(key(k), "must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::string choice(const std::string& k, const std::string& def, std::initializer_list<const char*> allowed) {
        const auto v = str(k, def);
        std::string list;
        for (const char* a : allowed) {
            if (v == a) return v;
            list += (list.empty() ? "" : "|") + std::string(a);
        }
        throw ConfigError(key(k), "must be one of " + list + ", got '" + v + "'");
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
        }
    }

private:
    void seen(const std::string& k) { seen_.insert(k); }

    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

std::vector<double> full_covariance(const std::vector<double>& v, std::size_t d, const std::string& key) {
    if (v.size() == d * d) return v;
    if (v.size() == d) {
        std::vector<double> full(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i) full[i * d + i] = v[i];
        return full;
    }
    throw ConfigError(key, "must hold d variances or a d x d matrix");
}

ModelSpec parse_model(const json& j, const std::string& prefix) {
    Reader r(j, prefix);
    ModelSpec m;
    m.family = r.choice("family", "regression", {"regression", "normal_mean", "gaussian_pair"});
    if (m.family == "regression") {
        if (!r.has("prior")) throw ConfigError(r.key("prior"), "required for the regression family");
        const auto& p = r.at("prior");
        if (p.is_string()) {
            m.prior_name = p.get<std::string>();
            const auto named = named_prior(m.prior_name);
            if (!named) throw ConfigError(r.key("prior"), "unknown prior scheme '" + m.prior_name + "' (pi1|pi2|pi3)");
            m.prior = *named;
        } else {
            Reader pr(p, r.key("prior"));
            m.prior_name = r.str("prior_name", "custom");
            for (const char* k : {"alpha_mean", "beta_mean", "alpha_var", "beta_var", "sigma2_shape", "sigma2_rate"}) {
                if (!pr.has(k)) throw ConfigError(pr.key(k), "required");
            }
            m.prior = {pr.num("alpha_mean", 0), pr.num("beta_mean", 0),    pr.num("alpha_var", 0),
                       pr.num("beta_var", 0),   pr.num("sigma2_shape", 0), pr.num("sigma2_rate", 0)};
            pr.finish();
            try {
                m.prior.validate();
            } catch (const Error& e) {
                throw ConfigError(r.key("prior"), e.what());
            }
        }
        if (p.is_string()) r.str("prior_name", "");
        m.label = r.str("label", m.prior_name);
    } else if (m.family == "normal_mean") {
        m.sigma2 = r.num("sigma2", 1.0);
        m.prior_mean = r.num("prior_mean", 0.0);
        m.prior_var = r.num("prior_var", 1.0);
        m.column = r.str("column", "y");
        m.label = r.str("label", "normal_mean");
        if (!(m.sigma2 > 0)) throw ConfigError(r.key("sigma2"), "must be positive");
        if (!(m.prior_var > 0)) throw ConfigError(r.key("prior_var"), "must be positive");
    } else {
        for (const char* k : {"mean0", "mean1", "cov0", "cov1"}) {
            if (!r.has(k)) throw ConfigError(r.key(k), "required for the gaussian_pair family");
        }
        auto& g = m.pair;
        g.mean0 = r.numbers("mean0");
        g.mean1 = r.numbers("mean1");
        const auto d = g.mean0.size();
        if (d == 0 || g.mean1.size() != d) throw ConfigError(r.key("mean1"), "must have the same length as mean0");
        g.cov0 = full_covariance(r.numbers("cov0"), d, r.key("cov0"));
        g.cov1 = full_covariance(r.numbers("cov1"), d, r.key("cov1"));
        g.c0 = r.num("c0", 1.0);
        g.c1 = r.num("c1", 1.0);
        m.label = r.str("label", "gaussian_pair");
        try {
            g.validate();
        } catch (const Error& e) {
            throw ConfigError(prefix, e.what());
        }
    }
    r.finish();
    return m;
}

json model_json(const ModelSpec& m) {
    json j{{"family", m.family}, {"label", m.label}};
    if (m.family == "regression") {
        j["prior_name"] = m.prior_name;
        j["prior"] = {{"alpha_mean", m.prior.alpha_mean},     {"beta_mean", m.prior.beta_mean},
                      {"alpha_var", m.prior.alpha_var},       {"beta_var", m.prior.beta_var},
                      {"sigma2_shape", m.prior.sigma2_shape}, {"sigma2_rate", m.prior.sigma2_rate}};
    } else if (m.family == "normal_mean") {
        j["sigma2"] = m.sigma2;
        j["prior_mean"] = m.prior_mean;
        j["prior_var"] = m.prior_var;
        j["column"] = m.column;
    } else {
        j["mean0"] = m.pair.mean0;
        j["mean1"] = m.pair.mean1;
        j["cov0"] = m.pair.cov0;
        j["cov1"] = m.pair.cov1;
        j["c0"] = m.pair.c0;
        j["c1"] = m.pair.c1;
    }
    return j;
}

void load_data(RunConfig& c) {
    const bool needs = c.model.family != "gaussian_pair";
    if (!needs) return;
    if (c.data.empty()) throw ConfigError("data", "a data file is required for the " + c.model.family + " family");
    try {
        if (c.model.family == "regression") {
            c.regression_data = std::make_shared<const RegressionData>(load_regression_csv(c.data_resolved));
        } else {
            c.observations = load_csv_columns(c.data_resolved, {c.model.column}).front();
        }
    } catch (const Error& e) {
        throw ConfigError("data", e.what());
    }
    if (c.model0 && c.model0->family != c.model.family) {
        throw ConfigError("model0.family", "must match model.family");
    }
}

}  // namespace

RunConfig parse_config(const json& doc, const std::string& command, const std::filesystem::path& base_dir) {
    Reader r(doc, "");
    RunConfig c;
    c.command = command;
    r.str("command", command);  // present in echoed configs
    if (!r.has("model")) throw ConfigError("model", "required");
    c.model = parse_model(r.at("model"), "model");
    if (r.has("model0")) c.model0 = parse_model(r.at("model0"), "model0");
    c.data = r.str("data", "");
    if (!c.data.empty()) {
        std::filesystem::path p(c.data);
        c.data_resolved = p.is_absolute() ? p : base_dir / p;
    }

    std::string default_path = command == "bayes-factor" ? "ms" : "pp";
    if (c.model.family == "gaussian_pair") default_path = "gaussian_pair";
    c.path = r.choice("path", default_path, {"pp", "ip", "ms", "qpp", "qip", "separate", "gaussian_pair"});
    c.nested = r.choice("nested", "pp", {"pp", "ip"});
    c.parameters = r.choice("parameters", "shared", {"shared", "disjoint"});
    c.method = r.choice("method", "ti", {"ti", "ss", "both"});

    if (r.has("schedule")) {
        Reader s(r.at("schedule"), "schedule");
        c.schedule.kind = s.choice("kind", "uniform", {"uniform", "powered_fraction", "beta_quantile", "explicit"});
        c.schedule.n = s.count("n", 100);
        c.schedule.c = s.num("c", 5.0);
        c.schedule.a = s.num("a", 0.3);
        if (s.has("points")) c.schedule.points = s.numbers("points");
        s.finish();
    }
    if (r.has("chain")) {
        Reader s(r.at("chain"), "chain");
        c.chain.iterations = s.count("iterations", c.chain.iterations);
        c.chain.burn_in = s.count("burn_in", c.chain.burn_in);
        c.chain.thin = s.count("thin", c.chain.thin);
        c.chain.seed = s.u64("seed", c.chain.seed);
        c.chain.adapt = s.flag("adapt", true);
        if (s.has("step_scale")) c.chain.step_scale = s.numbers("step_scale");
        c.sampler = s.choice("sampler", "auto", {"auto", "rwm", "gibbs"});
        s.finish();
    }
    if (r.has("batch")) {
        Reader s(r.at("batch"), "batch");
        c.batch.n_batches = s.count("n_batches", 30);
        c.batch.batch_size = s.count("batch_size", 0);
        s.finish();
    }
    if (r.has("init")) {
        Reader s(r.at("init"), "init");
        if (s.has("values")) c.init = s.numbers("values");
        c.warm_start = s.flag("warm_start", true);
        c.pilot_iterations = s.count("pilot_iterations", 0);
        s.finish();
    }
    if (r.has("t_star")) {
        Reader s(r.at("t_star"), "t_star");
        c.t_star_tol = s.num("tol", 1e-3);
        c.t_star_max_extra_runs = s.count("max_extra_runs", 30);
        s.finish();
    }
    c.tsallis = r.choice("tsallis", "positive", {"positive", "negative"});
    if (r.has("output")) {
        Reader s(r.at("output"), "output");
        c.output_dir = s.str("dir", "");
        c.dump_chains = s.flag("dump_chains", false);
        c.chains_dir = s.str("chains_dir", "");
        s.finish();
    }
    c.parallel = r.count("parallel", 1);
    r.finish();

    load_data(c);
    finalize_config(c);
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& file, const std::string& command) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config", "cannot read " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc, command, file.parent_path().empty() ? "." : file.parent_path());
}

void finalize_config(RunConfig& c) {
    if (c.output_dir.empty()) c.output_dir = default_output_dir().string();
    try {
        make_schedule(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(c.schedule.kind == "powered_fraction" ? "schedule.c"
                          : c.schedule.kind == "beta_quantile"  ? "schedule.a"
                          : c.schedule.kind == "explicit"       ? "schedule.points"
                                                                : "schedule.n",
                          e.what());
    }
    try {
        c.chain.validate();
    } catch (const Error& e) {
        throw ConfigError("chain", e.what());
    }
    if (c.batch.n_batches < 2) throw ConfigError("batch.n_batches", "must be at least 2");
    if (c.batch.batch_size != 0) {
        if (c.batch.batch_size < 2) throw ConfigError("batch.batch_size", "must be 0 (derived) or at least 2");
        if (c.batch.batch_size * c.batch.n_batches > c.chain.retained()) {
            throw ConfigError("batch.batch_size", "n_batches x batch_size exceeds the retained samples per chain");
        }
    } else if (c.chain.retained() < 2 * c.batch.n_batches) {
        throw ConfigError("batch.n_batches", "chains retain too few samples for this many batches");
    }
    if (!(c.t_star_tol > 0)) throw ConfigError("t_star.tol", "must be positive");
    if (c.parallel < 1) throw ConfigError("parallel", "must be at least 1");

    const bool pair = c.model.family == "gaussian_pair";
    if (pair != (c.path == "gaussian_pair")) {
        throw ConfigError("path", pair ? "the gaussian_pair family uses path 'gaussian_pair'"
                                       : "path 'gaussian_pair' needs model.family = gaussian_pair");
    }
    const bool two_models = c.path == "ms" || c.path == "qpp" || c.path == "qip" || c.path == "separate";
    if (c.command == "marginal" && c.path != "pp" && c.path != "ip") {
        throw ConfigError("path", "marginal supports pp or ip");
    }
    if (c.command == "bayes-factor" && !two_models) {
        throw ConfigError("path", "bayes-factor supports ms, qpp, qip or separate");
    }
    if (c.command != "bayes-factor" && c.path == "separate") {
        throw ConfigError("path", "the separate route is only available to bayes-factor");
    }
    if (two_models && !c.model0) throw ConfigError("model0", "required for path '" + c.path + "'");
    if (c.command == "oracle") {
        const bool ok = pair || (c.model.family == "regression" && (c.path == "pp" || c.path == "ms" || c.path == "qpp"));
        if (!ok) throw ConfigError("path", "oracle supports gaussian_pair, or regression with pp, ms or qpp");
    }
    if (c.parameters == "disjoint" && c.path != "ms" && c.path != "qpp" && c.path != "qip") {
        throw ConfigError("parameters", "disjoint parameters apply to the ms, qpp and qip paths");
    }
}

json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["model"] = model_json(c.model);
    j["model0"] = c.model0 ? model_json(*c.model0) : json(nullptr);
    j["data"] = c.data;
    j["path"] = c.path;
    j["nested"] = c.nested;
    j["parameters"] = c.parameters;
    j["method"] = c.method;
    j["schedule"] = {{"kind", c.schedule.kind}, {"n", c.schedule.n}, {"c", c.schedule.c}, {"a", c.schedule.a},
                     {"points", make_schedule(c).points()}};
    j["chain"] = {{"iterations", c.chain.iterations}, {"burn_in", c.chain.burn_in}, {"thin", c.chain.thin},
                  {"seed", c.chain.seed},             {"adapt", c.chain.adapt},     {"step_scale", c.chain.step_scale},
                  {"sampler", c.sampler}};
    j["batch"] = {{"n_batches", c.batch.n_batches},
                  {"batch_size", c.batch.batch_size ? c.batch.batch_size : c.chain.retained() / c.batch.n_batches}};
    j["init"] = {{"values", c.init ? json(*c.init) : json(nullptr)},
                 {"warm_start", c.warm_start},
                 {"pilot_iterations", c.pilot_iterations}};
    j["t_star"] = {{"tol", c.t_star_tol}, {"max_extra_runs", c.t_star_max_extra_runs}};
    j["tsallis"] = c.tsallis;
    j["output"] = {{"dir", c.output_dir}, {"dump_chains", c.dump_chains}, {"chains_dir", c.chains_dir}};
    j["parallel"] = c.parallel;
    return j;
}

TemperatureSchedule make_schedule(const RunConfig& c) {
    const auto& s = c.schedule;
    if (s.kind == "explicit") {
        if (s.points.empty()) throw ConfigError("schedule.points", "required for an explicit schedule");
        return explicit_schedule(s.points);
    }
    if (s.n < 1) throw ConfigError("schedule.n", "must be at least 1");
    if (s.kind == "uniform") return uniform_schedule(s.n);
    if (s.kind == "powered_fraction") return powered_fraction_schedule(s.n, s.c);
    return beta_quantile_schedule(s.n, s.a);
}

SamplerKind sampler_kind(const RunConfig& c) {
    if (c.sampler == "rwm") return SamplerKind::rwm;
    if (c.sampler == "gibbs") return SamplerKind::gibbs;
    return SamplerKind::automatic;
}

std::string inputs_hash(const RunConfig& c) {
    auto doc = to_json(c);
    doc.erase("output");
    doc.erase("parallel");
    const std::string text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::filesystem::path default_output_dir() {
    const char* env = std::getenv("THERMOPATH_OUT");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("thermopath-out");
}

}  // namespace thermo::cli
