#include "lpthresh/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lpthresh {

namespace {

// Role tags for sub-seed derivation.
constexpr std::uint64_t kRoleMatrix = 0x4d41545249580001ULL;
constexpr std::uint64_t kRoleSignal = 0x5349474e414c0002ULL;
constexpr std::uint64_t kRoleNoise = 0x4e4f495345000003ULL;
constexpr std::uint64_t kRoleTrial = 0x545249414c000004ULL;

}  // namespace

Vector generate_sparse_signal(std::size_t n, std::size_t k, RngSeed seed) {
    if (k > n) {
        throw std::invalid_argument("generate_sparse_signal: k = " + std::to_string(k) + " exceeds n = " +
                                    std::to_string(n));
    }
    Rng rng(seed);
    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots become a uniform random subset.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(index[i], index[j]);
    }
    Vector z(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        double v = rng.normal();
        while (v == 0.0) {
            v = rng.normal();
        }
        z[index[i]] = v;
    }
    return z;
}

ProblemInstance make_instance(std::size_t m, std::size_t n, std::size_t k, double noise_sigma, RngSeed seed) {
    if (!(k < m && m < n)) {
        throw std::invalid_argument("make_instance: need k < m < n, got k = " + std::to_string(k) +
                                    ", m = " + std::to_string(m) + ", n = " + std::to_string(n));
    }
    if (!(noise_sigma >= 0.0)) {
        throw std::invalid_argument("make_instance: noise_sigma must be nonnegative");
    }
    DenseMatrix a = gaussian_matrix(m, n, derive_seed(seed, kRoleMatrix));
    Vector z_true = generate_sparse_signal(n, k, derive_seed(seed, kRoleSignal));
    Vector b = matvec(a, z_true);
    if (noise_sigma > 0.0) {
        Rng rng(derive_seed(seed, kRoleNoise));
        for (double& v : b) {
            v += noise_sigma * rng.normal();
        }
    }
    return ProblemInstance{std::move(a), std::move(b), std::move(z_true), k, noise_sigma, seed};
}

double relative_error(std::span<const double> z_star, std::span<const double> z_true) {
    const double denom = norm2(z_true);
    if (denom == 0.0) {
        throw std::invalid_argument("relative_error: reference vector is zero");
    }
    return distance(z_star, z_true) / denom;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* p, std::size_t len) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void doubles(std::span<const double> v) { bytes(v.data(), v.size_bytes()); }
};

}  // namespace

std::uint64_t instance_digest(const ProblemInstance& instance) {
    Fnv1a f;
    f.u64(instance.a.rows());
    f.u64(instance.a.cols());
    f.doubles(instance.a.entries());
    f.doubles(instance.b);
    f.doubles(instance.z_true);
    return f.h;
}

double AlgorithmEntry::reported_p() const { return uses_epsilon(rule) ? p : penalty_exponent(rule); }

std::string AlgorithmEntry::label() const {
    std::string out(to_string(rule));
    if (uses_epsilon(rule)) {
        std::ostringstream ss;
        ss << "_p" << p;
        out += ss.str();
    }
    return out;
}

std::vector<std::size_t> SparsityRange::values() const {
    std::vector<std::size_t> out;
    if (step == 0) {
        return out;
    }
    for (std::size_t k = min; k <= max; k += step) {
        out.push_back(k);
    }
    return out;
}

void validate(const ExperimentSpec& s) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("experiment: " + msg); };
    if (s.m < 1 || s.n < 1) fail("m and n must be positive");
    if (s.m >= s.n) fail("m must be smaller than n");
    if (s.sparsity.step < 1) fail("sparsity step must be positive");
    if (s.sparsity.min < 1) fail("sparsity min must be at least 1");
    if (s.sparsity.min > s.sparsity.max) fail("sparsity min exceeds max");
    if (s.sparsity.max >= s.m) fail("sparsity max must be smaller than m");
    if (s.trials < 1) fail("trials must be positive");
    if (s.algorithms.empty()) fail("algorithm list is empty");
    if (!(s.noise_sigma >= 0.0)) fail("noise_sigma must be nonnegative");
    if (!(s.success_threshold >= 0.0)) fail("success_threshold must be nonnegative");
    for (const auto& alg : s.algorithms) {
        validate(solver_config_for(s.solver, alg, s.sparsity.min), s.n);
    }
}

SolverConfig solver_config_for(const SolverSettings& settings, const AlgorithmEntry& algorithm,
                               std::size_t sparsity) {
    SolverConfig c;
    c.rule = algorithm.rule;
    c.p = algorithm.p;
    c.eta = settings.eta;
    c.sparsity_r = sparsity;
    c.gamma = settings.gamma;
    c.epsilon_floor = settings.epsilon_floor;
    c.tol = settings.tol;
    c.max_iter = settings.max_iter;
    return c;
}

RngSeed trial_seed(RngSeed base, std::size_t k, std::size_t t) { return derive_seed(base, kRoleTrial, k, t); }

SweepResult run_sweep(const ExperimentSpec& spec, unsigned workers) {
    validate(spec);
    const std::vector<std::size_t> ks = spec.sparsity.values();
    const std::size_t n_alg = spec.algorithms.size();
    const std::size_t n_k = ks.size();
    const std::size_t n_cells = n_alg * n_k * spec.trials;

    std::vector<TrialRecord> records(n_cells);
    auto run_cell = [&](std::size_t cell) {
        const std::size_t t = cell % spec.trials;
        const std::size_t ki = (cell / spec.trials) % n_k;
        const std::size_t ai = cell / (spec.trials * n_k);
        const std::size_t k = ks[ki];
        const ProblemInstance inst = make_instance(spec.m, spec.n, k, spec.noise_sigma, trial_seed(spec.base_seed, k, t));
        const SolverConfig config = solver_config_for(spec.solver, spec.algorithms[ai], k);
        const SolverResult res = solve(inst.a, inst.b, config);

        TrialRecord& rec = records[cell];
        rec.algorithm = ai;
        rec.sparsity = k;
        rec.trial = t;
        rec.digest = instance_digest(inst);
        rec.relative_error = relative_error(res.z_star, inst.z_true);
        rec.iterations = res.iterations;
        rec.converged = res.converged;
        rec.success = res.converged && rec.relative_error <= spec.success_threshold;
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_cells)));
    if (n_workers == 1) {
        for (std::size_t c = 0; c < n_cells; ++c) {
            run_cell(c);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(n_workers);
            for (unsigned w = 0; w < n_workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t c = next.fetch_add(1); c < n_cells; c = next.fetch_add(1)) {
                        try {
                            run_cell(c);
                        } catch (...) {
                            std::lock_guard lock(error_mutex);
                            if (!error) error = std::current_exception();
                            next.store(n_cells);
                        }
                    }
                });
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    SweepResult out;
    out.curves.reserve(n_alg);
    for (std::size_t ai = 0; ai < n_alg; ++ai) {
        SuccessCurve curve;
        curve.algorithm = spec.algorithms[ai];
        for (std::size_t ki = 0; ki < n_k; ++ki) {
            CurvePoint pt;
            pt.sparsity = ks[ki];
            pt.trials = spec.trials;
            double sum_re = 0.0;
            double sum_it = 0.0;
            for (std::size_t t = 0; t < spec.trials; ++t) {
                const TrialRecord& rec = records[(ai * n_k + ki) * spec.trials + t];
                pt.successes += rec.success ? 1 : 0;
                sum_re += rec.relative_error;
                sum_it += static_cast<double>(rec.iterations);
            }
            const double trials = static_cast<double>(spec.trials);
            pt.success_rate = static_cast<double>(pt.successes) / trials;
            pt.mean_re = sum_re / trials;
            pt.mean_iterations = sum_it / trials;
            curve.points.push_back(pt);
        }
        out.curves.push_back(std::move(curve));
    }
    out.trials = std::move(records);
    return out;
}

}  // namespace lpthresh
