#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lpthresh/linalg.hpp"

namespace lpthresh {

/// Which scalar operator an iteration applies.
///
///   hard, soft         l0 / l1 baselines with the top-r adaptive threshold
///   half, two_thirds   exponent-1/2 and exponent-2/3 thresholding
///   half_eps,          the same operators applied to the smoothed penalty
///   two_thirds_eps       |z|^theta / (|z| + eps)^(theta - p)
enum class Family { hard, soft, half, two_thirds, half_eps, two_thirds_eps };

inline constexpr Family kAllFamilies[] = {Family::hard,     Family::soft,     Family::half,
                                          Family::two_thirds, Family::half_eps, Family::two_thirds_eps};

std::string_view to_string(Family f);
std::optional<Family> parse_family(std::string_view name);

/// Penalty exponent theta of the family (0 for hard, 1 for soft).
double penalty_exponent(Family f);
/// True for the families whose penalty carries per-component eps.
bool uses_epsilon(Family f);

struct SolverConfig {
    Family rule = Family::half_eps;
    /// Target exponent of the smoothed penalty; read only by the *_eps families.
    double p = 0.1;
    double eta = 0.01;
    /// Sparsity assumed by the adaptive lambda rule.
    std::size_t sparsity_r = 1;
    double gamma = 0.7;
    double epsilon_floor = 1e-3;
    double tol = 1e-8;
    int max_iter = 5000;
};

/// The exponent p actually in force: config.p for the *_eps families, theta
/// otherwise (so half behaves as half_eps at p = 1/2, and so on).
double effective_p(const SolverConfig& config);

/// Throws std::invalid_argument if `config` is unusable for an n-column problem.
void validate(const SolverConfig& config, std::size_t n);

inline constexpr double kLambdaFloor = 1e-12;

struct SolverState {
    Vector z;
    Vector az;  ///< A z, carried so each step does one product with A and one with A^T
    std::size_t k = 0;
    double lambda = 0.0;
    Vector epsilon;
    double mu = 0.0;
    /// C at (lambda, epsilon) of this state, evaluated at z.
    double objective = 0.0;
};

/// One step z^k -> z^(k+1). Objectives use the lambda and eps of that step.
struct IterationRecord {
    double objective = 0.0;       ///< C(z^(k+1))
    double objective_prev = 0.0;  ///< C(z^k)
    /// Same as `objective` but with the eps-penalty denominators frozen at
    /// z^k, i.e. the quantity the step minimizes.
    double reweighted = 0.0;
    double step_norm = 0.0;  ///< ||z^(k+1) - z^k||_2
    double lambda = 0.0;
};

enum class Termination { tolerance, max_iter };
std::string_view to_string(Termination t);

struct SolverResult {
    Vector z_star;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> trace;
    Termination termination_reason = Termination::max_iter;
    SolverState final_state;
};

/// (1 - eta) / ||A||_2^2
double step_size(const DenseMatrix& a, double eta);

/// 8 [Bz]_(r+1)^(3/2) ([z]_(r+1) + [eps]_(r+1))^(1/2 - p) / (sqrt(54) mu),
/// where [x]_j is the j-th largest magnitude of x. Requires r + 1 <= n.
double adaptive_lambda_half(std::span<const double> bz, std::span<const double> z, std::span<const double> epsilon,
                            std::size_t r, double mu, double p);

/// 4^(4/3) [Bz]_(r+1)^(4/3) ([z]_(r+1) + [eps]_(r+1))^(2/3 - p) / (48^(4/9) mu)
double adaptive_lambda_two_thirds(std::span<const double> bz, std::span<const double> z,
                                  std::span<const double> epsilon, std::size_t r, double mu, double p);

/// eps_i = max(gamma |[mu A^T (b - A z)]_i|, floor)
Vector epsilon_update(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double mu,
                      double gamma, double floor);

/// ||Az - b||^2 + lambda * penalty(z). The penalty is ||z||_0 for hard,
/// ||z||_1 for soft, and sum |z_i|^theta / (|z_i| + eps_i)^(theta - p)
/// otherwise (p = theta for half / two_thirds, where eps drops out).
double objective(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double lambda,
                 std::span<const double> epsilon, double p, Family family);

/// objective() with the denominators evaluated at `anchor` instead of z.
double reweighted_objective(const DenseMatrix& a, std::span<const double> b, std::span<const double> z,
                            std::span<const double> anchor, double lambda, std::span<const double> epsilon,
                            double p, Family family);

/// State at k = 0: z = z0, eps = floor everywhere, mu from step_size.
SolverState initial_state(const DenseMatrix& a, std::span<const double> b, const SolverConfig& config,
                          std::span<const double> z0);

/// Landweber step, adaptive lambda, eps update (eps families), then the
/// componentwise operator.
SolverState iterate_once(const SolverState& state, const DenseMatrix& a, std::span<const double> b,
                         const SolverConfig& config);

/// As iterate_once, but reuses state.lambda and state.epsilon instead of
/// recomputing them.
SolverState iterate_frozen(const SolverState& state, const DenseMatrix& a, std::span<const double> b,
                           const SolverConfig& config);

/// Iterates until ||z^(k+1) - z^k|| <= tol ||z^k|| (absolute when z^k = 0)
/// or max_iter steps. z0 defaults to zero.
SolverResult solve(const DenseMatrix& a, std::span<const double> b, const SolverConfig& config,
                   std::span<const double> z0 = {});

}  // namespace lpthresh
