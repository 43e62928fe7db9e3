#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lpthresh/linalg.hpp"
#include "lpthresh/solver.hpp"

namespace lpthresh {

struct ProblemInstance {
    DenseMatrix a;
    Vector b;
    Vector z_true;
    std::size_t sparsity_k = 0;
    double noise_sigma = 0.0;
    RngSeed seed;
};

/// Exactly k nonzeros on a uniformly random support, values i.i.d. N(0, 1).
Vector generate_sparse_signal(std::size_t n, std::size_t k, RngSeed seed);

/// Gaussian A, sparse z_true, b = A z_true + e with e_i ~ N(0, sigma^2).
/// Requires k < m < n. The three streams use sub-seeds of `seed`.
ProblemInstance make_instance(std::size_t m, std::size_t n, std::size_t k, double noise_sigma, RngSeed seed);

/// ||z_star - z_true|| / ||z_true||
double relative_error(std::span<const double> z_star, std::span<const double> z_true);

/// FNV-1a over the shape and raw bytes of A, b and z_true.
std::uint64_t instance_digest(const ProblemInstance& instance);

struct AlgorithmEntry {
    Family rule = Family::half_eps;
    double p = 0.1;

    /// Exponent reported for this entry: p for the eps families, the penalty
    /// exponent otherwise.
    double reported_p() const;
    /// "half_eps_p0.1", "hard", ... (safe as a file stem)
    std::string label() const;
};

struct SparsityRange {
    std::size_t min = 1;
    std::size_t max = 1;
    std::size_t step = 1;
    std::vector<std::size_t> values() const;
};

/// Solver parameters shared by every algorithm of a sweep.
struct SolverSettings {
    double eta = 0.01;
    double gamma = 0.7;
    double epsilon_floor = 1e-3;
    double tol = 1e-8;
    int max_iter = 5000;
};

struct ExperimentSpec {
    std::size_t m = 128;
    std::size_t n = 512;
    SparsityRange sparsity;
    std::size_t trials = 20;
    std::vector<AlgorithmEntry> algorithms;
    double noise_sigma = 0.0;
    RngSeed base_seed{1};
    double success_threshold = 1e-4;
    SolverSettings solver;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ExperimentSpec& spec);

SolverConfig solver_config_for(const SolverSettings& settings, const AlgorithmEntry& algorithm,
                               std::size_t sparsity);

/// Instance seed of trial t at sparsity k; independent of the algorithm, so
/// every algorithm sees the same instances.
RngSeed trial_seed(RngSeed base, std::size_t k, std::size_t t);

struct CurvePoint {
    std::size_t sparsity = 0;
    std::size_t successes = 0;
    std::size_t trials = 0;
    double success_rate = 0.0;  ///< successes / trials
    double mean_re = 0.0;
    double mean_iterations = 0.0;
    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct SuccessCurve {
    AlgorithmEntry algorithm;
    std::vector<CurvePoint> points;
};

struct TrialRecord {
    std::size_t algorithm = 0;  ///< index into spec.algorithms
    std::size_t sparsity = 0;
    std::size_t trial = 0;
    std::uint64_t digest = 0;
    double relative_error = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool success = false;
};

struct SweepResult {
    std::vector<SuccessCurve> curves;  ///< in spec.algorithms order
    /// Ordered by (algorithm, sparsity, trial) regardless of scheduling.
    std::vector<TrialRecord> trials;
};

/// Runs every (algorithm, sparsity, trial) cell on up to `workers` threads.
/// A trial succeeds when the solver converged and RE <= success_threshold.
SweepResult run_sweep(const ExperimentSpec& spec, unsigned workers = 1);

}  // namespace lpthresh
