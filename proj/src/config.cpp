#include "lpthresh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace lpthresh {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

YAML::Node parse_root(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.IsMap()) {
        throw ConfigError("config: top level must be a mapping");
    }
    if (root["config"]) {
        root = root["config"];
        if (!root.IsMap()) {
            throw ConfigError("config: 'config' must be a mapping");
        }
    }
    return root;
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) {
        throw ConfigError("config: '" + where + "' must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError("config: unknown key '" + key + "' in '" + where + "'");
        }
    }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& where, T fallback) {
    const YAML::Node v = node[key];
    if (!v) {
        return fallback;
    }
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config: bad value for '" + where + "." + key + "'");
    }
}

std::size_t get_count(const YAML::Node& node, const char* key, const std::string& where, std::size_t fallback) {
    const long long v = get<long long>(node, key, where, static_cast<long long>(fallback));
    if (v < 0) {
        throw ConfigError("config: '" + where + "." + key + "' must be nonnegative");
    }
    return static_cast<std::size_t>(v);
}

Family get_family(const YAML::Node& node, const std::string& where) {
    const YAML::Node v = node["rule"];
    if (!v) {
        throw ConfigError("config: '" + where + "' needs a 'rule'");
    }
    const auto name = v.as<std::string>();
    const auto family = parse_family(name);
    if (!family) {
        throw ConfigError("config: unknown algorithm '" + name +
                          "' (expected hard, soft, half, two_thirds, half_eps, two_thirds_eps)");
    }
    return *family;
}

AlgorithmEntry parse_algorithm(const YAML::Node& node, const std::string& where) {
    check_keys(node, where, {"rule", "p"});
    AlgorithmEntry a;
    a.rule = get_family(node, where);
    a.p = get<double>(node, "p", where, uses_epsilon(a.rule) ? 0.1 : penalty_exponent(a.rule));
    return a;
}

SolverSettings parse_solver(const YAML::Node& root) {
    SolverSettings s;
    const YAML::Node node = root["solver"];
    if (!node) {
        return s;
    }
    check_keys(node, "solver", {"eta", "gamma", "epsilon_floor", "tol", "max_iter"});
    s.eta = get<double>(node, "eta", "solver", s.eta);
    s.gamma = get<double>(node, "gamma", "solver", s.gamma);
    s.epsilon_floor = get<double>(node, "epsilon_floor", "solver", s.epsilon_floor);
    s.tol = get<double>(node, "tol", "solver", s.tol);
    s.max_iter = get<int>(node, "max_iter", "solver", s.max_iter);
    return s;
}

RngSeed get_seed(const YAML::Node& node, const std::string& where, RngSeed fallback) {
    return RngSeed{get<std::uint64_t>(node, "seed", where, fallback.value)};
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& text) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "<root>", {"experiment", "solver", "algorithms"});
    const YAML::Node e = root["experiment"];
    if (!e) {
        throw ConfigError("config: missing 'experiment' section");
    }
    check_keys(e, "experiment", {"m", "n", "sparsity", "trials", "noise_sigma", "seed", "success_threshold"});

    ExperimentSpec spec;
    spec.m = get_count(e, "m", "experiment", spec.m);
    spec.n = get_count(e, "n", "experiment", spec.n);
    const YAML::Node sp = e["sparsity"];
    if (!sp) {
        throw ConfigError("config: missing 'experiment.sparsity'");
    }
    if (sp.IsScalar()) {
        spec.sparsity.min = spec.sparsity.max = get_count(e, "sparsity", "experiment", 1);
        spec.sparsity.step = 1;
    } else {
        check_keys(sp, "experiment.sparsity", {"min", "max", "step"});
        spec.sparsity.min = get_count(sp, "min", "experiment.sparsity", 1);
        spec.sparsity.max = get_count(sp, "max", "experiment.sparsity", spec.sparsity.min);
        spec.sparsity.step = get_count(sp, "step", "experiment.sparsity", 1);
    }
    spec.trials = get_count(e, "trials", "experiment", spec.trials);
    spec.noise_sigma = get<double>(e, "noise_sigma", "experiment", spec.noise_sigma);
    spec.base_seed = get_seed(e, "experiment", spec.base_seed);
    spec.success_threshold = get<double>(e, "success_threshold", "experiment", spec.success_threshold);
    spec.solver = parse_solver(root);

    const YAML::Node algs = root["algorithms"];
    if (algs) {
        if (!algs.IsSequence()) {
            throw ConfigError("config: 'algorithms' must be a list");
        }
        for (std::size_t i = 0; i < algs.size(); ++i) {
            spec.algorithms.push_back(parse_algorithm(algs[i], "algorithms[" + std::to_string(i) + "]"));
        }
    }
    try {
        validate(spec);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) { return parse_experiment_spec(read_file(path)); }

SolveSpec parse_solve_spec(const std::string& text, const std::filesystem::path& base_dir) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "<root>", {"problem", "solver", "algorithm"});
    SolveSpec spec;
    const YAML::Node pr = root["problem"];
    if (!pr) {
        throw ConfigError("config: missing 'problem' section");
    }
    check_keys(pr, "problem", {"m", "n", "sparsity", "noise_sigma", "seed", "matrix", "rhs", "truth"});
    SolveProblem& p = spec.problem;
    p.m = get_count(pr, "m", "problem", p.m);
    p.n = get_count(pr, "n", "problem", p.n);
    p.sparsity = get_count(pr, "sparsity", "problem", p.sparsity);
    p.noise_sigma = get<double>(pr, "noise_sigma", "problem", p.noise_sigma);
    p.seed = get_seed(pr, "problem", p.seed);
    auto path_of = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (!pr[key]) return std::nullopt;
        std::filesystem::path path = get<std::string>(pr, key, "problem", "");
        return path.is_absolute() ? path : base_dir / path;
    };
    p.matrix = path_of("matrix");
    p.rhs = path_of("rhs");
    p.truth = path_of("truth");
    if (p.matrix.has_value() != p.rhs.has_value()) {
        throw ConfigError("config: 'problem.matrix' and 'problem.rhs' must be given together");
    }
    const YAML::Node alg = root["algorithm"];
    if (!alg) {
        throw ConfigError("config: missing 'algorithm' section");
    }
    spec.algorithm = parse_algorithm(alg, "algorithm");
    spec.solver = parse_solver(root);
    return spec;
}

SolveSpec load_solve_spec(const std::filesystem::path& path) {
    return parse_solve_spec(read_file(path), path.parent_path());
}

nlohmann::json to_json(const ExperimentSpec& spec) {
    nlohmann::json algs = nlohmann::json::array();
    for (const auto& a : spec.algorithms) {
        algs.push_back({{"rule", std::string(to_string(a.rule))}, {"p", a.p}});
    }
    return {
        {"experiment",
         {{"m", spec.m},
          {"n", spec.n},
          {"sparsity", {{"min", spec.sparsity.min}, {"max", spec.sparsity.max}, {"step", spec.sparsity.step}}},
          {"trials", spec.trials},
          {"noise_sigma", spec.noise_sigma},
          {"seed", spec.base_seed.value},
          // JSON has no infinity; YAML reads ".inf" back as one.
          {"success_threshold", std::isfinite(spec.success_threshold) ? nlohmann::json(spec.success_threshold)
                                                                       : nlohmann::json(".inf")}}},
        {"solver",
         {{"eta", spec.solver.eta},
          {"gamma", spec.solver.gamma},
          {"epsilon_floor", spec.solver.epsilon_floor},
          {"tol", spec.solver.tol},
          {"max_iter", spec.solver.max_iter}}},
        {"algorithms", algs},
    };
}

ExperimentSpec quick_scaled(const ExperimentSpec& spec) {
    ExperimentSpec q = spec;
    const double scale = 64.0 / static_cast<double>(spec.m);
    auto scaled = [&](std::size_t v) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(v) * scale)));
    };
    q.m = 64;
    q.n = 256;
    q.trials = 5;
    q.sparsity.min = scaled(spec.sparsity.min);
    q.sparsity.max = std::max(q.sparsity.min, scaled(spec.sparsity.max));
    q.sparsity.step = scaled(spec.sparsity.step);
    return q;
}

}  // namespace lpthresh
