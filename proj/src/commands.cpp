#include "lpthresh/commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpthresh/config.hpp"
#include "lpthresh/report.hpp"
#include "lpthresh/solver.hpp"

namespace lpthresh {

namespace {

template <class T, class Reader>
T read_file_with(const std::filesystem::path& path, Reader reader) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    try {
        return reader(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
    return read_file_with<DenseMatrix>(path, [](std::istream& in) { return read_matrix_csv(in); });
}

Vector load_vector(const std::filesystem::path& path) {
    return read_file_with<Vector>(path, [](std::istream& in) { return read_vector_csv(in); });
}

struct LoadedProblem {
    DenseMatrix a;
    Vector b;
    std::optional<Vector> truth;
    std::size_t sparsity = 0;
};

LoadedProblem load_problem(SolveProblem problem, const CommandOptions& o) {
    if (o.matrix) problem.matrix = o.matrix;
    if (o.rhs) problem.rhs = o.rhs;
    if (o.truth) problem.truth = o.truth;
    if (o.sparsity) problem.sparsity = *o.sparsity;
    if (o.seed) problem.seed = RngSeed{*o.seed};
    if (problem.matrix.has_value() != problem.rhs.has_value()) {
        throw std::invalid_argument("--matrix and --rhs must be given together");
    }
    if (problem.matrix) {
        DenseMatrix a = load_matrix(*problem.matrix);
        Vector b = load_vector(*problem.rhs);
        if (b.size() != a.rows()) {
            throw std::invalid_argument("rhs has " + std::to_string(b.size()) + " entries, matrix has " +
                                        std::to_string(a.rows()) + " rows");
        }
        std::optional<Vector> truth;
        if (problem.truth) {
            truth = load_vector(*problem.truth);
            if (truth->size() != a.cols()) {
                throw std::invalid_argument("truth has " + std::to_string(truth->size()) + " entries, matrix has " +
                                            std::to_string(a.cols()) + " columns");
            }
        }
        return LoadedProblem{std::move(a), std::move(b), std::move(truth), problem.sparsity};
    }
    ProblemInstance inst = make_instance(problem.m, problem.n, problem.sparsity, problem.noise_sigma, problem.seed);
    return LoadedProblem{std::move(inst.a), std::move(inst.b), std::move(inst.z_true), problem.sparsity};
}

ExperimentSpec effective_spec(const CommandOptions& o) {
    ExperimentSpec spec = load_experiment_spec(o.config);
    if (o.quick) spec = quick_scaled(spec);
    if (o.seed) spec.base_seed = RngSeed{*o.seed};
    validate(spec);
    return spec;
}

int run_and_emit(const ExperimentSpec& spec, const CommandOptions& o, std::ostream& out,
                 std::vector<SuccessCurve>* curves_out) {
    const auto start = std::chrono::steady_clock::now();
    const SweepResult result = run_sweep(spec, o.workers);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    const auto written = emit_curve_files(o.out_dir, result.curves);
    RunManifest manifest{spec, o.command_line, tool_version(), utc_timestamp(), elapsed.count(), o.workers};
    const auto manifest_path = o.out_dir / "manifest.json";
    {
        std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
        if (!mf) {
            throw std::runtime_error("cannot open '" + manifest_path.string() + "' for writing");
        }
        mf << manifest_json(manifest, result).dump(2) << '\n';
        if (!mf) {
            throw std::runtime_error("write to '" + manifest_path.string() + "' failed");
        }
    }
    out << "wrote " << written.size() + 1 << " files to " << o.out_dir.string() << " in " << elapsed.count()
        << " s\n";
    if (curves_out) *curves_out = result.curves;
    return kExitOk;
}

template <class Body>
int guarded(std::ostream& err, Body body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace

int cmd_solve(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SolveSpec spec = load_solve_spec(o.config);
        const LoadedProblem problem = load_problem(spec.problem, o);
        const SolverConfig config = solver_config_for(spec.solver, spec.algorithm, problem.sparsity);
        validate(config, problem.a.cols());
        const SolverResult res = solve(problem.a, problem.b, config);

        nlohmann::json report;
        report["algorithm"] = spec.algorithm.label();
        report["p"] = spec.algorithm.reported_p();
        report["sparsity_r"] = problem.sparsity;
        report["iterations"] = res.iterations;
        report["converged"] = res.converged;
        report["termination_reason"] = std::string(to_string(res.termination_reason));
        report["relative_error"] = problem.truth ? nlohmann::json(relative_error(res.z_star, *problem.truth))
                                                 : nlohmann::json(nullptr);
        report["z_star"] = res.z_star;
        out << report.dump(2) << '\n';
        return res.converged ? kExitOk : kExitMaxIter;
    });
}

int cmd_sweep(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] { return run_and_emit(effective_spec(o), o, out, nullptr); });
}

int cmd_compare(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentSpec spec = effective_spec(o);
        std::set<Family> present;
        for (const auto& a : spec.algorithms) present.insert(a.rule);
        std::string missing;
        for (Family f : kAllFamilies) {
            if (!present.count(f)) {
                missing += (missing.empty() ? "" : ", ") + std::string(to_string(f));
            }
        }
        if (!missing.empty()) {
            throw std::invalid_argument("compare needs all six rules; missing: " + missing);
        }
        std::vector<SuccessCurve> curves;
        run_and_emit(spec, o, out, &curves);
        write_summary_table(out, curves, 0.9);
        return kExitOk;
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Iterative thresholding solvers for sparse recovery, with success-rate sweeps"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    CommandOptions o;
    o.workers = std::max(1u, std::thread::hardware_concurrency());
    {
        std::ostringstream cl;
        for (int i = 0; i < argc; ++i) cl << (i ? " " : "") << argv[i];
        o.command_line = cl.str();
    }
    std::string config, out_dir = o.out_dir.string();
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "YAML config file")->required();
        sub->add_option("--seed", seed, "override the base seed");
    };
    auto batch = [&](CLI::App* sub) {
        common(sub);
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--quick", o.quick, "scale down to m = 64, n = 256, 5 trials");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve one instance, JSON on stdout");
    common(solve_cmd);
    std::string matrix, rhs, truth;
    std::size_t sparsity = 0;
    solve_cmd->add_option("--matrix", matrix, "CSV matrix A (one row per line)");
    solve_cmd->add_option("--rhs", rhs, "CSV vector b");
    solve_cmd->add_option("--truth", truth, "CSV reference signal for the relative error");
    solve_cmd->add_option("--sparsity", sparsity, "assumed sparsity r")->check(CLI::PositiveNumber);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "success-rate sweep over sparsity");
    batch(sweep_cmd);
    CLI::App* compare_cmd = app.add_subcommand("compare", "sweep all six rules and rank them");
    batch(compare_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    o.config = config;
    o.out_dir = out_dir;
    auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
    CLI::App* used = app.get_subcommands().front();
    if (given(used, "--seed")) o.seed = seed;
    if (used == solve_cmd) {
        if (given(solve_cmd, "--matrix")) o.matrix = matrix;
        if (given(solve_cmd, "--rhs")) o.rhs = rhs;
        if (given(solve_cmd, "--truth")) o.truth = truth;
        if (given(solve_cmd, "--sparsity")) o.sparsity = sparsity;
        return cmd_solve(o, out, err);
    }
    if (used == sweep_cmd) return cmd_sweep(o, out, err);
    return cmd_compare(o, out, err);
}

}  // namespace lpthresh
