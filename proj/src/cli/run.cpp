#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "thermopath/cli.hpp"
#include "thermopath/diagnostics.hpp"
#include "thermopath/errors.hpp"
#include "thermopath/estimators_ss.hpp"
#include "thermopath/estimators_ti.hpp"
#include "thermopath/model_eval.hpp"

namespace thermo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kImportanceSeedIndex = 1ULL << 30;

json estimate_json(const EstimateWithError& e) { return {{"value", e.value}, {"mce", e.mce}}; }

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Csv {
public:
    Csv(const fs::path& file, const std::string& header) : out_(file) {
        if (!out_) throw ConfigError("output.dir", "cannot write " + file.string());
        out_ << header << '\n';
    }
    Csv& operator<<(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        sep();
        out_ << buf;
        return *this;
    }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ofstream out_;
    bool first_ = true;
};

// Everything a subcommand needs to sample: the path, a starting point and the
// models behind it.
struct Target {
    Path path;
    ParamVector init;
    std::optional<BayesModel> model1, model0;
    std::optional<ImportanceDensity> g1, g0;
};

BayesModel make_model(const RunConfig& c, const ModelSpec& m) {
    if (m.family == "regression") return BayesModel::from(RegressionModel(c.regression_data, m.prior, m.label));
    return BayesModel::from(NormalMeanModel(c.observations, m.sigma2, m.prior_mean, m.prior_var, m.label));
}

ChainConfig importance_chain(const RunConfig& c, std::uint64_t k) {
    ChainConfig cfg = c.chain;
    cfg.seed = chain_seed(c.chain.seed, kImportanceSeedIndex + k);
    return cfg;
}

Target build_target(const RunConfig& c) {
    if (c.path == "gaussian_pair") {
        return {Path(c.model.pair.path()), c.init ? ParamVector(*c.init) : ParamVector(c.model.pair.mean0), {}, {}, {}, {}};
    }
    const auto m1 = make_model(c, c.model);
    const auto kind = sampler_kind(c);
    const bool need_g = c.path == "ip" || c.path == "qip" || c.parameters == "disjoint" ||
                        (c.path == "separate" && c.nested == "ip");
    std::optional<ImportanceDensity> g1, g0;
    if (need_g) g1 = build_importance(m1, importance_chain(c, 0), kind);

    if (c.path == "pp" || c.path == "ip") {
        Path p = c.path == "pp" ? Path(GeometricPath{m1.log_prior, m1.log_posterior_kernel()})
                                : Path(GeometricPath{g1->density, m1.log_posterior_kernel()});
        return {p, c.init ? ParamVector(*c.init) : m1.init, m1, {}, g1, {}};
    }
    const auto m0 = make_model(c, *c.model0);
    if (need_g) g0 = build_importance(m0, importance_chain(c, 1), kind);
    ModelLink link{c.parameters == "shared", {}, {}};
    if (!link.shared) {
        link.pseudo_prior1 = g1->density;
        link.pseudo_prior0 = g0->density;
    }
    const auto* pg1 = g1 ? &*g1 : nullptr;
    const auto* pg0 = g0 ? &*g0 : nullptr;
    Path p = c.path == "ms"    ? ms_path(m1, m0, link)
             : c.path == "qpp" ? quadrivial_path(m1, m0, NestedPath::pp, link, pg1, pg0)
             : c.path == "qip" ? quadrivial_path(m1, m0, NestedPath::ip, link, pg1, pg0)
                               : Path(GeometricPath{m1.log_prior, m1.log_posterior_kernel()});
    std::vector<double> init(m1.init.values().begin(), m1.init.values().end());
    if (!link.shared) init.insert(init.end(), m0.init.values().begin(), m0.init.values().end());
    return {p, c.init ? ParamVector(*c.init) : ParamVector(init), m1, m0, g1, g0};
}

LadderOptions ladder_options(const RunConfig& c, const ParamVector& init) {
    LadderOptions o;
    o.init = init;
    o.warm_start = c.warm_start;
    o.pilot_iterations = c.pilot_iterations;
    o.workers = c.parallel;
    o.sampler = sampler_kind(c);
    return o;
}

EvalOptions eval_options(const RunConfig& c, const ParamVector& init) {
    return {c.chain, ladder_options(c, init), c.batch, c.method == "ss" ? Method::ss : Method::ti};
}

struct RunDir {
    fs::path dir;
    json artifacts = json::object();

    fs::path file(const std::string& name, const std::string& role) {
        artifacts[role] = name;
        return dir / name;
    }
};

void write_curve(RunDir& out, const std::string& name, const LadderOutput& ladder, double log_lambda) {
    const auto curve = e_hat_curve(ladder);
    const auto kl = kl_t_curve(curve, log_lambda);
    const auto partial = nti_partial(kl);
    Csv csv(out.file(name, name.substr(0, name.find('.'))), "t,e_hat,v_hat,kl_t_hat,nti_partial");
    for (std::size_t i = 0; i < curve.schedule.size(); ++i) {
        csv << curve.schedule[i] << curve.e_hat[i] << curve.v_hat[i] << kl.kl_t_hat[i] << partial[i];
        csv.end_row();
    }
}

json write_steps(RunDir& out, const std::string& name, const LadderOutput& ladder, const Path& path) {
    const auto ss = stepping_stone(ladder, path);
    Csv csv(out.file(name, name.substr(0, name.find('.'))), "t_lo,t_hi,log_ratio,ess");
    json steps = json::array();
    for (std::size_t i = 0; i < ss.step_log_ratios.size(); ++i) {
        csv << ss.schedule[i] << ss.schedule[i + 1] << ss.step_log_ratios[i] << ss.ess_per_step[i];
        csv.end_row();
        steps.push_back({{"t_lo", ss.schedule[i]},
                         {"t_hi", ss.schedule[i + 1]},
                         {"log_ratio", ss.step_log_ratios[i]},
                         {"ess", ss.ess_per_step[i]}});
    }
    return steps;
}

void write_geometry(RunDir& out, const GeometryReport& g) {
    Csv csv(out.file("geometry.csv", "geometry"), "t_lo,t_hi,slope,j_proxy,v_hat_lo,v_hat_hi");
    for (const auto& p : g.panels) {
        csv << p.t_lo << p.t_hi << p.slope << p.j_proxy << p.v_hat_lo << p.v_hat_hi;
        csv.end_row();
    }
}

void dump_chains(RunDir& out, const RunConfig& c, const LadderOutput& ladder, const std::string& prefix) {
    const fs::path root = c.chains_dir.empty() ? out.dir : fs::path(c.chains_dir);
    const fs::path dir = root / (prefix + "chains");
    fs::create_directories(dir);
    out.artifacts[prefix + "chains"] = dir.string();
    for (std::size_t i = 0; i < ladder.chains.size(); ++i) {
        const auto& chain = ladder.chains[i];
        std::string header = "iter";
        for (std::size_t k = 0; k < chain.dim; ++k) header += ",theta_" + std::to_string(k + 1);
        header += ",u";
        char name[32];
        std::snprintf(name, sizeof name, "chain_%03zu.csv", i);
        Csv csv(dir / name, header);
        for (std::size_t r = 0; r < chain.size(); ++r) {
            csv << static_cast<double>(r);
            for (double v : chain.sample(r)) csv << v;
            csv << chain.u_values[r];
            csv.end_row();
        }
    }
}

json ladder_meta(const LadderOutput& ladder) {
    json temps = json::array();
    for (const auto& c : ladder.chains) {
        temps.push_back({{"t", c.t}, {"seed", c.seed_used}, {"retained", c.size()}, {"acceptance", c.acceptance_rate}});
    }
    return temps;
}

void print_row(std::ostream& os, const std::string& name, const EstimateWithError& e) {
    os << "  " << std::left << std::setw(22) << name << std::right << std::setw(16) << std::setprecision(8) << e.value
       << "  (mce " << std::setprecision(3) << e.mce << ")\n";
}

void print_value(std::ostream& os, const std::string& name, double v) {
    os << "  " << std::left << std::setw(22) << name << std::right << std::setw(16) << std::setprecision(8) << v << "\n";
}

json eval_json(const RunConfig& c, RunDir& out, const EvalResult& r, const std::string& prefix, std::ostream& os) {
    json j;
    j["log_lambda"] = estimate_json(r.estimate);
    if (c.method == "both" || c.method == "ti") j["ti"] = estimate_json(r.ti);
    if (c.method == "both" || c.method == "ss") j["ss"] = estimate_json(r.ss);
    j["steps"] = write_steps(out, prefix + "steps.csv", r.ladder, r.path);
    write_curve(out, prefix + "curve.csv", r.ladder, r.estimate.value);
    const auto diag = diagnose(r.ladder, r.path, c.batch);
    write_geometry(out, diag.geometry);
    j["nti_residual"] = estimate_json(diag.residual);
    j["verdict"] = diag.verdict;
    j["warnings"] = r.warnings;
    j["temperatures"] = ladder_meta(r.ladder);
    if (c.dump_chains) dump_chains(out, c, r.ladder, prefix);
    if (c.method == "both" || c.method == "ti") print_row(os, prefix + "TI log ratio", r.ti);
    if (c.method == "both" || c.method == "ss") print_row(os, prefix + "SS log ratio", r.ss);
    os << "  " << diag.verdict << "\n";
    return j;
}

json divergences_json(const DivergenceReport& d) {
    return {{"log_lambda", estimate_json(d.log_lambda)},
            {"kl_1_0", estimate_json(d.kl_1_0)},
            {"kl_0_1", estimate_json(d.kl_0_1)},
            {"j", estimate_json(d.j)},
            {"bhattacharyya", estimate_json(d.bhattacharyya)},
            {"hellinger", estimate_json(d.hellinger)},
            {"chernoff_info", estimate_json(d.chernoff_info)},
            {"renyi_at_t_star", estimate_json(d.renyi_at_t_star)},
            {"tsallis_at_t_star", estimate_json(d.tsallis_at_t_star)}};
}

json t_star_json(const TStarResult& t, const TemperatureSchedule& original) {
    json added = json::array();
    for (double p : t.ladder.schedule.points()) {
        if (original.index_of(p) == TemperatureSchedule::npos) added.push_back(p);
    }
    return {{"value", t.t_star},           {"lo", t.lo},
            {"hi", t.hi},                  {"half_width", t.half_width},
            {"sign_risk_lo", t.sign_risk_lo}, {"sign_risk_hi", t.sign_risk_hi},
            {"extra_runs", t.extra_runs},  {"added_temperatures", added},
            {"warnings", t.warnings}};
}

json oracle_json(const ExactDivergences& d) {
    return {{"log_lambda", d.log_lambda},
            {"kl_1_0", d.kl_1_0},
            {"kl_0_1", d.kl_0_1},
            {"j", d.j},
            {"bhattacharyya", d.bhattacharyya},
            {"hellinger", d.hellinger},
            {"t_star", d.t_star},
            {"chernoff_info", d.chernoff_info},
            {"renyi_at_t_star", d.renyi_at_t_star},
            {"tsallis_at_t_star", d.tsallis_at_t_star}};
}

}  // namespace

json run(const RunConfig& c, std::ostream& os) {
    const std::string hash = inputs_hash(c);
    RunDir out{fs::path(c.output_dir) / (c.command + "-" + hash.substr(0, 12))};
    fs::create_directories(out.dir);
    os << c.command << " [" << c.path << "] seed " << c.chain.seed << "\n";

    json results;
    const auto schedule = make_schedule(c);
    if (c.command == "oracle") {
        ExactDivergences d;
        if (c.path == "gaussian_pair") {
            d = exact_divergences(c.model.pair);
        } else {
            const auto target = build_target(c);
            d = divergences_from_profile([&](double t) { return regression_log_z(target.path, t); },
                                         [&](double t) { return regression_e_t(target.path, t); });
        }
        results = oracle_json(d);
        os << results.dump(2) << "\n";
    } else if (c.command == "marginal") {
        const auto target = build_target(c);
        const auto opts = eval_options(c, target.init);
        const auto r = c.path == "pp" ? marginal_pp(*target.model1, schedule, opts)
                                      : marginal_ip(*target.model1, *target.g1, schedule, opts);
        results = eval_json(c, out, r, "", os);
    } else if (c.command == "bayes-factor") {
        const auto target = build_target(c);
        const auto opts = eval_options(c, target.init);
        if (c.path == "separate") {
            const auto nested = c.nested == "ip" ? NestedPath::ip : NestedPath::pp;
            const auto m0 = make_model(c, *c.model0);
            std::optional<ImportanceDensity> g0;
            if (nested == NestedPath::ip) g0 = build_importance(m0, importance_chain(c, 1), sampler_kind(c));
            const auto r = bayes_factor_separate(*target.model1, m0, nested, schedule, eval_options(c, target.model1->init),
                                                 target.g1 ? &*target.g1 : nullptr, g0 ? &*g0 : nullptr);
            results["log_bf"] = estimate_json(r.estimate);
            if (c.method != "ss") results["ti"] = estimate_json(r.ti);
            if (c.method != "ti") results["ss"] = estimate_json(r.ss);
            os << "model 1:\n";
            results["model1"] = eval_json(c, out, r.model1, "model1_", os);
            os << "model 0:\n";
            results["model0"] = eval_json(c, out, r.model0, "model0_", os);
            print_row(os, "log BF (separate)", r.estimate);
        } else {
            const auto ladder = run_ladder(target.path, schedule, c.chain, opts.ladder);
            EvalResult r{{}, ti_estimate(ladder, c.batch), ss_estimate(ladder, target.path, c.batch), target.path,
                         ladder, {}};
            r.estimate = c.method == "ss" ? r.ss : r.ti;
            results = eval_json(c, out, r, "", os);
            results["log_bf"] = results["log_lambda"];
        }
    } else if (c.command == "divergences" || c.command == "chernoff") {
        const auto target = build_target(c);
        const auto lopts = ladder_options(c, target.init);
        TStarOptions topts;
        topts.tol = c.t_star_tol;
        topts.max_extra_runs = c.t_star_max_extra_runs;
        topts.sampler = lopts.sampler;
        const auto ts = estimate_t_star(target.path, schedule, c.chain, lopts, topts);
        results["t_star"] = t_star_json(ts, schedule);
        if (c.command == "divergences") {
            const auto d = divergence_report(ts.ladder, ts.t_star, std::nullopt, c.batch,
                                             c.tsallis == "negative" ? TsallisSign::negative : TsallisSign::positive);
            results["log_lambda"] = estimate_json(d.log_lambda);
            results["divergences"] = divergences_json(d);
            print_row(os, "log lambda", d.log_lambda);
            print_row(os, "KL(p1||p0)", d.kl_1_0);
            print_row(os, "KL(p0||p1)", d.kl_0_1);
            print_row(os, "J", d.j);
            print_row(os, "Bhattacharyya", d.bhattacharyya);
            print_row(os, "Hellinger", d.hellinger);
            print_row(os, "Chernoff information", d.chernoff_info);
            print_row(os, "Renyi at t*", d.renyi_at_t_star);
            print_row(os, "Tsallis at t*", d.tsallis_at_t_star);
        } else {
            const auto ci = chernoff_information(ts.ladder, ts.t_star, std::nullopt, c.batch);
            results["log_lambda"] = estimate_json(ti_estimate(ts.ladder, c.batch));
            results["chernoff_info"] = estimate_json(ci);
            print_row(os, "Chernoff information", ci);
        }
        print_value(os, "t*", ts.t_star);
        print_value(os, "t* half-width", ts.half_width);
        print_value(os, "extra runs", static_cast<double>(ts.extra_runs));
        for (const auto& w : ts.warnings) os << "  warning: " << w << "\n";
        write_curve(out, "curve.csv", ts.ladder, ts.log_lambda_hat);
        results["temperatures"] = ladder_meta(ts.ladder);
        if (c.dump_chains) dump_chains(out, c, ts.ladder, "");
    } else if (c.command == "diagnose") {
        const auto target = build_target(c);
        const auto ladder = run_ladder(target.path, schedule, c.chain, ladder_options(c, target.init));
        const auto d = diagnose(ladder, target.path, c.batch);
        write_geometry(out, d.geometry);
        write_curve(out, "curve.csv", ladder, ti_trapezoid(e_hat_curve(ladder)));
        const auto& w = d.geometry.panels[d.worst_panel];
        results = {{"nti_residual", estimate_json(d.residual)},
                   {"flagged", d.flagged},
                   {"verdict", d.verdict},
                   {"worst_panel", {{"t_lo", w.t_lo}, {"t_hi", w.t_hi}, {"slope", w.slope}}},
                   {"temperatures", ladder_meta(ladder)}};
        print_row(os, "NTI residual", d.residual);
        os << "  " << d.verdict << "\n";
        if (c.dump_chains) dump_chains(out, c, ladder, "");
    } else {
        throw ArgumentError("cli", "unknown command '" + c.command + "'");
    }

    json doc{{"command", c.command},
             {"inputs_hash", hash},
             {"seed", c.chain.seed},
             {"timestamp", timestamp_utc()},
             {"config", to_json(c)},
             {"results", results},
             {"artifacts", out.artifacts},
             {"run_dir", out.dir.string()}};
    {
        std::ofstream f(out.dir / "result.json");
        f << doc.dump(2) << "\n";
    }
    {
        std::ofstream ledger(fs::path(c.output_dir) / "results.jsonl", std::ios::app);
        if (!ledger) throw ConfigError("output.dir", "cannot append to the results ledger");
        ledger << doc.dump() << "\n";
    }
    os << "  results: " << (out.dir / "result.json").string() << "\n";
    return doc;
}

}  // namespace thermo::cli
