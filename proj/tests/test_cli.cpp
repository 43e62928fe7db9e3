#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpthresh/commands.hpp"
#include "lpthresh/config.hpp"
#include "lpthresh/report.hpp"
#include "lpthresh/experiments.hpp"

using namespace lpthresh;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lpthresh");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("lpthresh_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallSweep = R"(
experiment:
  m: 32
  n: 128
  sparsity: {min: 2, max: 6, step: 2}
  trials: 2
  seed: 5
algorithms:
  - {rule: half_eps, p: 0.1}
  - {rule: soft}
)";

const char* kSmallCompare = R"(
experiment:
  m: 32
  n: 128
  sparsity: {min: 2, max: 4, step: 2}
  trials: 2
  seed: 5
algorithms:
  - {rule: half_eps, p: 0.1}
  - {rule: two_thirds_eps, p: 0}
  - {rule: half}
  - {rule: two_thirds}
  - {rule: soft}
  - {rule: hard}
)";

}  // namespace

TEST_CASE("solve on a generated easy instance") {
    const fs::path d = scratch("solve");
    const auto cfg = write(d / "s.yaml", "problem: {m: 64, n: 256, sparsity: 5, seed: 3}\n"
                                         "algorithm: {rule: half_eps, p: 0.1}\n");
    const Run r = cli({"solve", "--config", cfg.string()});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["converged"] == true);
    CHECK(j["termination_reason"] == "tolerance");
    CHECK(j["relative_error"].get<double>() <= 1e-4);
    CHECK(j["z_star"].size() == 256);
    fs::remove_all(d);
}

TEST_CASE("solve hitting max_iter exits 2") {
    const fs::path d = scratch("maxiter");
    const auto cfg = write(d / "s.yaml", "problem: {m: 64, n: 256, sparsity: 30, seed: 3}\n"
                                         "algorithm: {rule: half_eps}\nsolver: {max_iter: 1}\n");
    const Run r = cli({"solve", "--config", cfg.string()});
    CHECK(r.code == kExitMaxIter);
    CHECK(nlohmann::json::parse(r.out)["termination_reason"] == "max_iter");
    fs::remove_all(d);
}

TEST_CASE("solve from CSV files") {
    const fs::path d = scratch("files");
    const ProblemInstance inst = make_instance(40, 120, 4, 0.0, RngSeed{11});
    {
        std::ofstream a(d / "a.csv"), b(d / "b.csv"), t(d / "t.csv");
        write_csv(a, inst.a);
        write_csv(b, inst.b);
        write_csv(t, inst.z_true);
    }
    const auto cfg = write(d / "s.yaml", "problem: {sparsity: 4, matrix: a.csv, rhs: b.csv}\n"
                                         "algorithm: {rule: two_thirds_eps, p: 0}\n");
    const Run r = cli({"solve", "--config", cfg.string(), "--truth", (d / "t.csv").string()});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["relative_error"].get<double>() <= 1e-4);
    CHECK(j["sparsity_r"] == 4);

    const Run no_truth = cli({"solve", "--config", cfg.string(), "--sparsity", "6"});
    CHECK(no_truth.code == kExitOk);
    const auto j2 = nlohmann::json::parse(no_truth.out);
    CHECK(j2["relative_error"].is_null());
    CHECK(j2["sparsity_r"] == 6);

    write(d / "short.csv", "1\n2\n");
    const Run bad = cli({"solve", "--config", cfg.string(), "--rhs", (d / "short.csv").string()});
    CHECK(bad.code == kExitError);
    CHECK(bad.err.find("rhs") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("input errors exit 1 with a diagnostic") {
    const fs::path d = scratch("errors");
    CHECK(cli({"solve", "--config", (d / "missing.yaml").string()}).code == kExitError);
    CHECK(cli({"sweep", "--config", (d / "missing.yaml").string()}).code == kExitError);
    CHECK(cli({}).code == kExitError);
    CHECK(cli({"frobnicate"}).code == kExitError);
    CHECK(cli({"sweep"}).code == kExitError);
    CHECK(cli({"--help"}).code == kExitOk);

    const auto empty = write(d / "empty.yaml", "experiment: {m: 32, n: 128, sparsity: 2}\nalgorithms: []\n");
    const Run e = cli({"sweep", "--config", empty.string(), "--out", (d / "o").string()});
    CHECK(e.code == kExitError);
    CHECK(e.err.find("empty") != std::string::npos);

    const auto unknown = write(d / "unknown.yaml", "experiment: {m: 32, n: 128, sparsity: 2}\n"
                                                   "algorithms: [{rule: lasso}]\n");
    const Run u = cli({"compare", "--config", unknown.string(), "--out", (d / "o").string()});
    CHECK(u.code == kExitError);
    CHECK(u.err.find("unknown algorithm") != std::string::npos);

    const auto partial = write(d / "partial.yaml", kSmallSweep);
    const Run p = cli({"compare", "--config", partial.string(), "--out", (d / "o").string()});
    CHECK(p.code == kExitError);
    CHECK(p.err.find("missing") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("sweep output is reproducible, also from the manifest") {
    const fs::path d = scratch("sweep");
    const auto cfg = write(d / "c.yaml", kSmallSweep);
    REQUIRE(cli({"sweep", "--config", cfg.string(), "--out", (d / "a").string(), "--workers", "1"}).code == 0);
    REQUIRE(cli({"sweep", "--config", cfg.string(), "--out", (d / "b").string(), "--workers", "3"}).code == 0);
    REQUIRE(cli({"sweep", "--config", (d / "a" / "manifest.json").string(), "--out", (d / "c").string()}).code == 0);
    for (const char* f : {"curves.csv", "curve_half_eps_p0.1.csv", "curve_soft.csv", "plot_soft.tsv"}) {
        REQUIRE(fs::exists(d / "a" / f));
        CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
        CHECK(slurp(d / "a" / f) == slurp(d / "c" / f));
    }
    const auto m = nlohmann::json::parse(slurp(d / "a" / "manifest.json"));
    CHECK(m["cells"].size() == 6);
    CHECK(m["config"]["experiment"]["seed"] == 5);

    REQUIRE(cli({"sweep", "--config", cfg.string(), "--out", (d / "s").string(), "--seed", "6"}).code == 0);
    CHECK(nlohmann::json::parse(slurp(d / "s" / "manifest.json"))["config"]["experiment"]["seed"] == 6);
    fs::remove_all(d);
}

TEST_CASE("compare prints a ranking") {
    const fs::path d = scratch("compare");
    const auto cfg = write(d / "c.yaml", kSmallCompare);
    const Run r = cli({"compare", "--config", cfg.string(), "--out", (d / "o").string()});
    CHECK(r.code == kExitOk);
    for (const char* label : {"half_eps_p0.1", "two_thirds_eps_p0", "half", "two_thirds", "soft", "hard"}) {
        CHECK(r.out.find(label) != std::string::npos);
        CHECK(fs::exists(d / "o" / (std::string("curve_") + label + ".csv")));
    }
    CHECK(r.out.find("rank") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("shipped configs parse and the p-sweep yields four curves") {
    const fs::path configs = LPTHRESH_CONFIG_DIR;
    for (const char* name : {"psweep_half_eps.yaml", "psweep_two_thirds_eps.yaml", "compare_noiseless.yaml",
                             "compare_noisy.yaml"}) {
        CHECK_NOTHROW(load_experiment_spec(configs / name));
    }
    CHECK_NOTHROW(load_solve_spec(configs / "solve.yaml"));

    const fs::path d = scratch("psweep");
    // quick scale keeps this a few seconds
    const Run r = cli({"sweep", "--config", (configs / "psweep_half_eps.yaml").string(), "--quick", "--out", d.string()});
    REQUIRE(r.code == kExitOk);
    std::ifstream in(d / "curves.csv");
    const auto curves = parse_long_csv(in, 5);
    REQUIRE(curves.size() == 4);
    const char* labels[] = {"half_eps_p0", "half_eps_p0.1", "half_eps_p0.3", "half_eps_p0.5"};
    for (std::size_t i = 0; i < 4; ++i) CHECK(curves[i].algorithm.label() == labels[i]);
    fs::remove_all(d);
}
