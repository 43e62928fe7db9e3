#include "lpthresh/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lpthresh/thresholding.hpp"

namespace lpthresh {

std::string_view to_string(Family f) {
    switch (f) {
        case Family::hard: return "hard";
        case Family::soft: return "soft";
        case Family::half: return "half";
        case Family::two_thirds: return "two_thirds";
        case Family::half_eps: return "half_eps";
        case Family::two_thirds_eps: return "two_thirds_eps";
    }
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : kAllFamilies) {
        if (to_string(f) == name) {
            return f;
        }
    }
    return std::nullopt;
}

std::string_view to_string(Termination t) { return t == Termination::tolerance ? "tolerance" : "max_iter"; }

double penalty_exponent(Family f) {
    switch (f) {
        case Family::hard: return 0.0;
        case Family::soft: return 1.0;
        case Family::half:
        case Family::half_eps: return 0.5;
        case Family::two_thirds:
        case Family::two_thirds_eps: return 2.0 / 3.0;
    }
    return 0.0;
}

bool uses_epsilon(Family f) { return f == Family::half_eps || f == Family::two_thirds_eps; }

double effective_p(const SolverConfig& config) {
    return uses_epsilon(config.rule) ? config.p : penalty_exponent(config.rule);
}

void validate(const SolverConfig& c, std::size_t n) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("solver config: " + msg); };
    if (!(c.eta > 0.0 && c.eta < 1.0)) fail("eta must lie in (0, 1)");
    if (c.sparsity_r < 1) fail("sparsity_r must be positive");
    if (c.sparsity_r >= n) fail("sparsity_r must be smaller than n = " + std::to_string(n));
    if (!(c.gamma >= 0.0)) fail("gamma must be nonnegative");
    if (!(c.epsilon_floor > 0.0)) fail("epsilon_floor must be positive");
    if (!(c.tol > 0.0)) fail("tol must be positive");
    if (c.max_iter < 1) fail("max_iter must be positive");
    if (uses_epsilon(c.rule) && !(c.p >= 0.0 && c.p < 1.0)) fail("p must lie in [0, 1)");
}

double step_size(const DenseMatrix& a, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument("step_size: eta must lie in (0, 1)");
    }
    const double s = spectral_norm(a);
    return (1.0 - eta) / (s * s);
}

namespace {

void check_rank(std::size_t r, std::size_t n, const char* where) {
    if (r + 1 > n) {
        throw DimensionError(std::string(where) + ": r + 1 exceeds the vector length");
    }
}

void check_lengths(std::span<const double> bz, std::span<const double> z, std::span<const double> eps,
                   const char* where) {
    if (z.size() != bz.size() || eps.size() != bz.size()) {
        throw DimensionError(std::string(where) + ": length mismatch");
    }
}

}  // namespace

double adaptive_lambda_half(std::span<const double> bz, std::span<const double> z, std::span<const double> epsilon,
                            std::size_t r, double mu, double p) {
    check_lengths(bz, z, epsilon, "adaptive_lambda_half");
    check_rank(r, bz.size(), "adaptive_lambda_half");
    const double bz_r = rearranged_value(bz, r);
    const double scale = rearranged_value(z, r) + rearranged_value(epsilon, r);
    return 8.0 * bz_r * std::sqrt(bz_r) * std::pow(scale, 0.5 - p) / (std::sqrt(54.0) * mu);
}

double adaptive_lambda_two_thirds(std::span<const double> bz, std::span<const double> z,
                                  std::span<const double> epsilon, std::size_t r, double mu, double p) {
    check_lengths(bz, z, epsilon, "adaptive_lambda_two_thirds");
    check_rank(r, bz.size(), "adaptive_lambda_two_thirds");
    static const double kNumer = std::cbrt(256.0);             // 4^(4/3)
    static const double kDenom = std::pow(48.0, 4.0 / 9.0);    // (48^4)^(1/9)
    const double bz_r = rearranged_value(bz, r);
    const double scale = rearranged_value(z, r) + rearranged_value(epsilon, r);
    return kNumer * std::pow(bz_r, 4.0 / 3.0) * std::pow(scale, 2.0 / 3.0 - p) / (kDenom * mu);
}

namespace {

// mu * A^T (b - az)
Vector scaled_gradient_step(const DenseMatrix& a, std::span<const double> b, std::span<const double> az, double mu) {
    Vector resid(b.size());
    for (std::size_t i = 0; i < resid.size(); ++i) {
        resid[i] = b[i] - az[i];
    }
    Vector g = matvec_transpose(a, resid);
    for (double& v : g) {
        v *= mu;
    }
    return g;
}

Vector epsilon_from_step(std::span<const double> step, double gamma, double floor) {
    Vector eps(step.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = std::max(gamma * std::abs(step[i]), floor);
    }
    return eps;
}

double residual_sq(std::span<const double> az, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < az.size(); ++i) {
        const double d = az[i] - b[i];
        s += d * d;
    }
    return s;
}

// sum |z_i|^theta / (|anchor_i| + eps_i)^(theta - p), zero terms skipped.
double smoothed_penalty(std::span<const double> z, std::span<const double> anchor, std::span<const double> eps,
                        double theta, double p) {
    const double power = theta - p;
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double m = std::abs(z[i]);
        if (m == 0.0) {
            continue;
        }
        const double denom = power == 0.0 ? 1.0 : std::pow(std::abs(anchor[i]) + eps[i], power);
        s += std::pow(m, theta) / denom;
    }
    return s;
}

double penalty(std::span<const double> z, std::span<const double> anchor, std::span<const double> eps, double p,
               Family family) {
    switch (family) {
        case Family::hard:
            return static_cast<double>(std::count_if(z.begin(), z.end(), [](double v) { return v != 0.0; }));
        case Family::soft: {
            double s = 0.0;
            for (double v : z) s += std::abs(v);
            return s;
        }
        case Family::half:
        case Family::two_thirds: {
            const double theta = penalty_exponent(family);
            return smoothed_penalty(z, anchor, eps, theta, theta);
        }
        case Family::half_eps:
        case Family::two_thirds_eps:
            if (eps.size() != z.size()) {
                throw DimensionError("objective: epsilon length mismatch");
            }
            return smoothed_penalty(z, anchor, eps, penalty_exponent(family), p);
    }
    return 0.0;
}

double objective_from_az(std::span<const double> az, std::span<const double> b, std::span<const double> z,
                         std::span<const double> anchor, double lambda, std::span<const double> eps, double p,
                         Family family) {
    const double fit = residual_sq(az, b);
    if (lambda == 0.0) {
        return fit;
    }
    return fit + lambda * penalty(z, anchor, eps, p, family);
}

struct StepOutcome {
    SolverState next;
    IterationRecord record;
};

StepOutcome advance(const SolverState& s, const DenseMatrix& a, std::span<const double> b, const SolverConfig& c,
                    bool frozen) {
    const std::size_t n = s.z.size();
    if (a.cols() != n || a.rows() != b.size() || s.az.size() != b.size() || s.epsilon.size() != n) {
        throw DimensionError("iterate: state does not match the problem");
    }
    const Family family = c.rule;
    const double theta = penalty_exponent(family);
    const double p = effective_p(c);
    const double mu = s.mu;

    const Vector g = scaled_gradient_step(a, b, s.az, mu);
    Vector bz(n);
    for (std::size_t i = 0; i < n; ++i) {
        bz[i] = s.z[i] + g[i];
    }

    Vector eps = s.epsilon;
    double lambda = s.lambda;
    // Baseline threshold; taken from Bz directly when not frozen so the
    // (r+1)-th magnitude meets it exactly.
    double t = 0.0;
    if (family == Family::hard) t = std::sqrt(lambda * mu);
    if (family == Family::soft) t = 0.5 * lambda * mu;
    if (!frozen) {
        if (uses_epsilon(family)) {
            eps = epsilon_from_step(g, c.gamma, c.epsilon_floor);
        }
        switch (family) {
            case Family::hard:
                t = rearranged_value(bz, c.sparsity_r);
                lambda = t * t / mu;
                break;
            case Family::soft:
                t = rearranged_value(bz, c.sparsity_r);
                lambda = 2.0 * t / mu;
                break;
            case Family::half:
            case Family::half_eps:
                lambda = std::max(adaptive_lambda_half(bz, s.z, eps, c.sparsity_r, mu, p), kLambdaFloor);
                break;
            case Family::two_thirds:
            case Family::two_thirds_eps:
                lambda = std::max(adaptive_lambda_two_thirds(bz, s.z, eps, c.sparsity_r, mu, p), kLambdaFloor);
                break;
        }
    }

    Vector z_next(n);
    switch (family) {
        case Family::hard:
            // minimizer of (x - r)^2 + t^2 [x != 0], so lambda = t^2 / mu
            for (std::size_t i = 0; i < n; ++i) z_next[i] = hard_threshold(bz[i], t);
            break;
        case Family::soft:
            // minimizer of (x - r)^2 + 2t |x|, so lambda = 2t / mu
            for (std::size_t i = 0; i < n; ++i) z_next[i] = soft_threshold(bz[i], t);
            break;
        default: {
            const double power = theta - p;
            const bool half = theta == 0.5;
            for (std::size_t i = 0; i < n; ++i) {
                const double weight = lambda * mu / std::pow(std::abs(s.z[i]) + eps[i], power);
                z_next[i] = half ? half_threshold(bz[i], weight) : two_thirds_threshold(bz[i], weight);
            }
            break;
        }
    }

    StepOutcome out;
    SolverState& next = out.next;
    next.az = matvec(a, z_next);
    next.k = s.k + 1;
    next.lambda = lambda;
    next.mu = mu;
    next.objective = objective_from_az(next.az, b, z_next, z_next, lambda, eps, p, family);

    IterationRecord& rec = out.record;
    rec.objective = next.objective;
    rec.objective_prev = objective_from_az(s.az, b, s.z, s.z, lambda, eps, p, family);
    rec.reweighted = objective_from_az(next.az, b, z_next, s.z, lambda, eps, p, family);
    rec.step_norm = distance(z_next, s.z);
    rec.lambda = lambda;

    next.z = std::move(z_next);
    next.epsilon = std::move(eps);
    return out;
}

}  // namespace

Vector epsilon_update(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double mu,
                      double gamma, double floor) {
    if (!(floor > 0.0) || !(gamma >= 0.0)) {
        throw std::invalid_argument("epsilon_update: need gamma >= 0 and floor > 0");
    }
    if (b.size() != a.rows() || z.size() != a.cols()) {
        throw DimensionError("epsilon_update: dimension mismatch");
    }
    const Vector az = matvec(a, z);
    return epsilon_from_step(scaled_gradient_step(a, b, az, mu), gamma, floor);
}

double objective(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double lambda,
                 std::span<const double> epsilon, double p, Family family) {
    return reweighted_objective(a, b, z, z, lambda, epsilon, p, family);
}

double reweighted_objective(const DenseMatrix& a, std::span<const double> b, std::span<const double> z,
                            std::span<const double> anchor, double lambda, std::span<const double> epsilon,
                            double p, Family family) {
    if (b.size() != a.rows() || z.size() != a.cols() || anchor.size() != z.size()) {
        throw DimensionError("objective: dimension mismatch");
    }
    const Vector az = matvec(a, z);
    return objective_from_az(az, b, z, anchor, lambda, epsilon, p, family);
}

SolverState initial_state(const DenseMatrix& a, std::span<const double> b, const SolverConfig& config,
                          std::span<const double> z0) {
    validate(config, a.cols());
    if (b.size() != a.rows()) {
        throw DimensionError("solve: b has length " + std::to_string(b.size()) + ", expected " +
                             std::to_string(a.rows()));
    }
    SolverState s;
    if (z0.empty()) {
        s.z.assign(a.cols(), 0.0);
    } else if (z0.size() != a.cols()) {
        throw DimensionError("solve: z0 has the wrong length");
    } else {
        s.z.assign(z0.begin(), z0.end());
    }
    s.az = matvec(a, s.z);
    s.epsilon.assign(a.cols(), config.epsilon_floor);
    s.mu = step_size(a, config.eta);
    s.objective = residual_sq(s.az, b);
    return s;
}

SolverState iterate_once(const SolverState& state, const DenseMatrix& a, std::span<const double> b,
                         const SolverConfig& config) {
    return advance(state, a, b, config, false).next;
}

SolverState iterate_frozen(const SolverState& state, const DenseMatrix& a, std::span<const double> b,
                           const SolverConfig& config) {
    return advance(state, a, b, config, true).next;
}

SolverResult solve(const DenseMatrix& a, std::span<const double> b, const SolverConfig& config,
                   std::span<const double> z0) {
    SolverResult result;
    SolverState state = initial_state(a, b, config, z0);
    result.trace.reserve(std::min<std::size_t>(static_cast<std::size_t>(config.max_iter), 1024));

    for (int it = 0; it < config.max_iter; ++it) {
        const double base = norm2(state.z);
        StepOutcome step = advance(state, a, b, config, false);
        result.trace.push_back(step.record);
        state = std::move(step.next);
        const double change = step.record.step_norm;
        if (base > 0.0 ? change <= config.tol * base : change <= config.tol) {
            result.converged = true;
            result.termination_reason = Termination::tolerance;
            break;
        }
    }
    result.iterations = result.trace.size();
    result.z_star = state.z;
    result.final_state = std::move(state);
    return result;
}

}  // namespace lpthresh
