#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "lpthresh/experiments.hpp"

namespace lpthresh {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-instance problem for `solve`: generated from a seed, or read from
/// CSV files (paths resolved against the config file's directory).
struct SolveProblem {
    std::size_t m = 64;
    std::size_t n = 256;
    std::size_t sparsity = 5;  ///< true sparsity when generated; the solver's r in both cases
    double noise_sigma = 0.0;
    RngSeed seed{1};
    std::optional<std::filesystem::path> matrix;
    std::optional<std::filesystem::path> rhs;
    std::optional<std::filesystem::path> truth;
};

struct SolveSpec {
    SolveProblem problem;
    AlgorithmEntry algorithm;
    SolverSettings solver;
};

// Configuration files are YAML. Since JSON is valid YAML, a run manifest can
// be passed back as a config: a top-level "config" key is unwrapped.
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
ExperimentSpec parse_experiment_spec(const std::string& text);
SolveSpec load_solve_spec(const std::filesystem::path& path);
SolveSpec parse_solve_spec(const std::string& text, const std::filesystem::path& base_dir = {});

/// Echo of a spec in the config layout; parse_experiment_spec(echo.dump())
/// gives back the same spec.
nlohmann::json to_json(const ExperimentSpec& spec);

/// Small CI-sized variant: m = 64, n = 256, trials = 5, sparsity range
/// scaled by 64 / m.
ExperimentSpec quick_scaled(const ExperimentSpec& spec);

}  // namespace lpthresh
