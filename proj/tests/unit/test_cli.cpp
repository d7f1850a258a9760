#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "thermopath/cli.hpp"
#include "thermopath/errors.hpp"

using namespace thermo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("thermopath-cli-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json pine_doc() {
    return json::parse(R"({"model": {"family": "regression", "prior": "pi1"}, "data": "pine.csv"})");
}

json toy_doc(const fs::path& out) {
    auto doc = json::parse(R"({
      "model": {"family": "normal_mean", "sigma2": 1.0, "prior_mean": 0.0, "prior_var": 4.0},
      "data": "conjugate_toy.csv",
      "path": "ip",
      "method": "both",
      "schedule": {"kind": "uniform", "n": 10},
      "chain": {"iterations": 6000, "burn_in": 1000, "seed": 5}
    })");
    doc["output"] = {{"dir", out.string()}};
    return doc;
}

cli::RunConfig parse(const json& doc, const std::string& command) {
    return cli::parse_config(doc, command, THERMOPATH_DATA_DIR);
}

std::string config_error_key(const json& doc, const std::string& command) {
    try {
        parse(doc, command);
    } catch (const ConfigError& e) {
        return e.key;
    }
    return "";
}

int run_main(std::vector<std::string> args) {
    args.insert(args.begin(), "thermopath");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("minimal pine config echoes the named prior and every default") {
    const auto c = parse(pine_doc(), "marginal");
    const auto echo = cli::to_json(c);
    const auto& prior = echo["model"]["prior"];
    CHECK(prior["alpha_mean"] == 3000.0);
    CHECK(prior["beta_mean"] == 185.0);
    CHECK(prior["alpha_var"] == 1e6);
    CHECK(prior["beta_var"] == 1e4);
    CHECK(prior["sigma2_shape"] == 3.0);
    CHECK(prior["sigma2_rate"] == 1.8e5);
    CHECK(echo["path"] == "pp");
    CHECK(echo["batch"]["n_batches"] == 30);
    CHECK(echo["init"]["warm_start"] == true);
    CHECK(echo["t_star"]["tol"] == 1e-3);
    CHECK(echo["schedule"]["points"].size() == 101);
    CHECK(echo["chain"]["seed"].is_number_unsigned());
}

TEST_CASE("echoed configs parse back to themselves") {
    auto doc = pine_doc();
    doc["schedule"] = {{"kind", "powered_fraction"}, {"n", 20}, {"c", 4}};
    const auto echo = cli::to_json(parse(doc, "marginal"));
    const auto again = cli::to_json(parse(echo, "marginal"));
    CHECK(echo == again);
    CHECK(cli::inputs_hash(parse(echo, "marginal")) == cli::inputs_hash(parse(doc, "marginal")));
}

TEST_CASE("strict parsing names the offending key") {
    auto doc = pine_doc();
    doc["schedule"] = {{"kind", "powered_fraction"}, {"c", 0.5}};
    CHECK(config_error_key(doc, "marginal") == "schedule.c");

    doc = pine_doc();
    doc["shedule"] = json::object();
    CHECK(config_error_key(doc, "marginal") == "shedule");

    doc = pine_doc();
    doc["chain"] = {{"iters", 10}};
    CHECK(config_error_key(doc, "marginal") == "chain.iters");

    doc = pine_doc();
    doc["model"]["prior"] = {{"alpha_mean", 1}};
    CHECK(config_error_key(doc, "marginal").rfind("model.prior.", 0) == 0);

    doc = pine_doc();
    doc["method"] = "both-ways";
    CHECK(config_error_key(doc, "marginal") == "method");

    doc = pine_doc();
    doc["path"] = "ms";
    CHECK(config_error_key(doc, "marginal") == "path");

    doc = pine_doc();
    doc["data"] = "no-such-file.csv";
    CHECK(config_error_key(doc, "marginal") == "data");

    doc = pine_doc();
    doc["batch"] = {{"n_batches", 1}};
    CHECK(config_error_key(doc, "marginal").rfind("batch", 0) == 0);

    doc = pine_doc();
    doc["schedule"] = {{"kind", "explicit"}, {"points", {0.0, 0.7, 0.3, 1.0}}};
    CHECK(config_error_key(doc, "marginal") == "schedule.points");
}

TEST_CASE("method both reports TI and SS from one ladder, and reruns are identical") {
    const auto out = scratch("both");
    const auto c = parse(toy_doc(out), "marginal");
    std::ostringstream log;
    auto a = cli::run(c, log);
    auto b = cli::run(c, log);
    const auto& r = a["results"];
    REQUIRE(r.contains("ti"));
    REQUIRE(r.contains("ss"));
    const double ti = r["ti"]["value"], ss = r["ss"]["value"];
    const double mce = std::hypot(r["ti"]["mce"].get<double>(), r["ss"]["mce"].get<double>());
    CHECK(std::abs(ti - ss) <= 3 * mce);
    const NormalMeanModel toy(c.observations, 1.0, 0.0, 4.0);
    CHECK(std::abs(ti - toy.exact_log_marginal()) <= 3 * r["ti"]["mce"].get<double>());

    a.erase("timestamp");
    b.erase("timestamp");
    CHECK(a.dump() == b.dump());

    std::ifstream ledger(out / "results.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(ledger, line)) {
        const auto entry = json::parse(line);
        CHECK(entry.contains("inputs_hash"));
        CHECK(entry.contains("timestamp"));
        ++lines;
    }
    CHECK(lines == 2);
    const fs::path dir = a["run_dir"].get<std::string>();
    CHECK(fs::exists(dir / "curve.csv"));
    CHECK(fs::exists(dir / "steps.csv"));
    CHECK(fs::exists(dir / "geometry.csv"));
    std::ifstream curve(dir / "curve.csv");
    std::getline(curve, line);
    CHECK(line == "t,e_hat,v_hat,kl_t_hat,nti_partial");
}

TEST_CASE("worker count does not change results") {
    const auto out = scratch("workers");
    auto doc = toy_doc(out);
    doc["path"] = "pp";
    auto one = parse(doc, "marginal");
    auto three = one;
    three.parallel = 3;
    std::ostringstream log;
    CHECK(cli::run(one, log)["results"] == cli::run(three, log)["results"]);
    CHECK(cli::inputs_hash(one) == cli::inputs_hash(three));
}

TEST_CASE("chain dumps") {
    const auto out = scratch("dump");
    auto doc = toy_doc(out);
    doc["schedule"] = {{"kind", "uniform"}, {"n", 2}};
    doc["output"]["dump_chains"] = true;
    std::ostringstream log;
    const auto r = cli::run(parse(doc, "marginal"), log);
    const fs::path dir = fs::path(r["run_dir"].get<std::string>()) / "chains";
    std::ifstream f(dir / "chain_001.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "iter,theta_1,u");
    std::size_t rows = 0;
    for (std::string line; std::getline(f, line);) ++rows;
    CHECK(rows == 5000);
}

TEST_CASE("command-line entry point and exit codes") {
    const auto out = scratch("main");
    const auto write = [&](const std::string& name, const json& doc) {
        const auto file = out / name;
        std::ofstream(file) << doc.dump();
        return file.string();
    };
    const auto pair = json::parse(R"({"model": {"family": "gaussian_pair", "mean0": [0], "cov0": [1],
                                                "mean1": [1], "cov1": [1]}})");
    CHECK(run_main({"oracle", "--config", write("pair.json", pair), "--out", out.string()}) == 0);

    auto same = pair;
    same["model"]["mean1"] = {0};
    same["chain"] = {{"iterations", 2000}, {"burn_in", 500}};
    CHECK(run_main({"divergences", "-c", write("same.json", same), "--out", out.string()}) == 4);

    auto bad = pair;
    bad["schedule"] = {{"kind", "powered_fraction"}, {"c", 0.5}};
    CHECK(run_main({"divergences", "-c", write("bad.json", bad), "--out", out.string()}) == 2);
    CHECK(run_main({"divergences", "-c", (out / "missing.json").string()}) == 2);
    CHECK(run_main({"marginal"}) == 2);
    CHECK(run_main({"bayes-factor", "-c", write("pair2.json", pair), "--route", "nope"}) == 2);

    auto narrow = pair;
    narrow["model"]["cov1"] = {-1};
    CHECK(run_main({"oracle", "-c", write("narrow.json", narrow), "--out", out.string()}) == 2);
}

TEST_CASE("command-line overrides reach the echoed config") {
    const auto out = scratch("override");
    auto doc = toy_doc(out);
    const auto file = out / "toy.json";
    std::ofstream(file) << doc.dump();
    fs::copy_file(THERMOPATH_DATA_DIR "/conjugate_toy.csv", out / "conjugate_toy.csv");
    REQUIRE(run_main({"marginal", "-c", file.string(), "--seed", "99", "--iterations", "3000", "--path", "pp",
                      "--method", "ss", "--out", out.string()}) == 0);
    std::ifstream ledger(out / "results.jsonl");
    std::string line;
    std::getline(ledger, line);
    const auto entry = json::parse(line);
    CHECK(entry["seed"] == 99);
    CHECK(entry["config"]["chain"]["iterations"] == 3000);
    CHECK(entry["config"]["path"] == "pp");
    CHECK(entry["results"].contains("ss"));
    CHECK_FALSE(entry["results"].contains("ti"));
}
