#include <doctest.h>

#include <cmath>

#include "lpthresh/experiments.hpp"
#include "lpthresh/solver.hpp"

using namespace lpthresh;

namespace {

SolverConfig config_for(Family f, double p, std::size_t r) {
    SolverConfig c;
    c.rule = f;
    c.p = p;
    c.sparsity_r = r;
    return c;
}

}  // namespace

TEST_CASE("family names round trip") {
    for (Family f : kAllFamilies) {
        CHECK(parse_family(to_string(f)) == f);
    }
    CHECK_FALSE(parse_family("lasso").has_value());
    CHECK(penalty_exponent(Family::half) == 0.5);
    CHECK(penalty_exponent(Family::two_thirds_eps) == 2.0 / 3.0);
    CHECK(uses_epsilon(Family::half_eps));
    CHECK_FALSE(uses_epsilon(Family::two_thirds));
    CHECK(effective_p(config_for(Family::half, 0.1, 1)) == 0.5);
    CHECK(effective_p(config_for(Family::half_eps, 0.1, 1)) == 0.1);
}

TEST_CASE("step_size") {
    CHECK(step_size(DenseMatrix::identity(3), 0.5) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(step_size(DenseMatrix::identity(3).scaled(2.0), 0.01) == doctest::Approx(0.2475).epsilon(1e-10));
    const DenseMatrix a = gaussian_matrix(40, 90, RngSeed{11});
    const double s = spectral_norm(a);
    CHECK(std::abs(step_size(a, 0.01) * s * s - 0.99) <= 1e-8);
    CHECK_THROWS_AS(step_size(a, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step_size(a, 1.0), std::invalid_argument);
}

TEST_CASE("adaptive lambda for the 1/2 family") {
    const Vector eps(4, 1e-3);
    CHECK(adaptive_lambda_half(Vector{5, 0, 0, 0}, Vector(4, 0.0), eps, 1, 0.5, 0.1) == 0.0);
    CHECK(adaptive_lambda_half(Vector{3, 1, 0, 0}, Vector(4, 0.0), eps, 1, 0.5, 0.5) ==
          doctest::Approx(8.0 / (std::sqrt(54.0) * 0.5)).epsilon(1e-14));
    const Vector bz{3, 1, 4, 2}, z{1, 0, 2, 0}, e(4, 0.1);
    CHECK(adaptive_lambda_half(bz, z, e, 1, 0.5, 0.1) ==
          doctest::Approx(8 * std::pow(3.0, 1.5) * std::pow(1.1, 0.4) / (std::sqrt(54.0) * 0.5)).epsilon(1e-14));
    CHECK_THROWS(adaptive_lambda_half(bz, z, e, 4, 0.5, 0.1));
}

TEST_CASE("adaptive lambda for the 2/3 family") {
    const Vector bz{3, 1, 4, 2}, z{1, 0, 2, 0}, e(4, 0.1);
    const double c = std::pow(4.0, 4.0 / 3.0) / std::pow(48.0, 4.0 / 9.0);
    CHECK(adaptive_lambda_two_thirds(Vector{1, 0, 0, 0}, z, e, 1, 0.5, 0.0) == 0.0);
    CHECK(adaptive_lambda_two_thirds(bz, z, e, 1, 0.5, 2.0 / 3.0) ==
          doctest::Approx(c * std::pow(3.0, 4.0 / 3.0) / 0.5).epsilon(1e-14));
    CHECK(adaptive_lambda_two_thirds(bz, z, e, 1, 0.5, 0.0) ==
          doctest::Approx(c * std::pow(3.0, 4.0 / 3.0) * std::pow(1.1, 2.0 / 3.0) / 0.5).epsilon(1e-14));
    CHECK_THROWS(adaptive_lambda_two_thirds(bz, z, e, 4, 0.5, 0.0));
}

TEST_CASE("epsilon_update") {
    const DenseMatrix i2 = DenseMatrix::identity(2);
    CHECK(epsilon_update(i2, Vector{1, 2}, Vector{1, 2}, 0.5, 0.7, 1e-3) == Vector{1e-3, 1e-3});
    CHECK(epsilon_update(i2, Vector{2, 0}, Vector{0, 0}, 0.5, 0.0, 1e-3) == Vector{1e-3, 1e-3});
    const Vector e = epsilon_update(i2, Vector{2, 0}, Vector{0, 0}, 0.5, 0.7, 1e-3);
    CHECK(e[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(e[1] == 1e-3);
    CHECK_THROWS_AS(epsilon_update(i2, Vector{2}, Vector{0, 0}, 0.5, 0.7, 1e-3), DimensionError);
}

TEST_CASE("objective") {
    const DenseMatrix a(2, 3, {1, 0, 2, 0, 1, -1});
    const Vector b{1, 2}, eps{0.1, 0.2, 0.3};
    const double bb = 5.0;
    for (Family f : kAllFamilies) {
        CHECK(objective(a, b, Vector(3, 0.0), 2.0, eps, effective_p(config_for(f, 0.1, 1)), f) == bb);
    }
    const Vector z{1, -4, 0.25};
    const Vector az = matvec(a, z);
    const double res = (az[0] - 1) * (az[0] - 1) + (az[1] - 2) * (az[1] - 2);
    CHECK(objective(a, b, z, 0.0, eps, 0.1, Family::half_eps) == doctest::Approx(res).epsilon(1e-15));
    const double half_norm = 1 + 2 + 0.5;
    CHECK(objective(a, b, z, 2.0, eps, 0.5, Family::half_eps) == doctest::Approx(res + 2 * half_norm).epsilon(1e-14));
    CHECK(objective(a, b, z, 2.0, eps, 0.5, Family::half) == doctest::Approx(res + 2 * half_norm).epsilon(1e-14));
    CHECK(objective(a, b, z, 2.0, eps, 0, Family::hard) == doctest::Approx(res + 2 * 3).epsilon(1e-14));
    CHECK(objective(a, b, z, 2.0, eps, 1, Family::soft) == doctest::Approx(res + 2 * 5.25).epsilon(1e-14));
    double smoothed = 0.0;
    for (int i = 0; i < 3; ++i) smoothed += std::sqrt(std::abs(z[i])) / std::pow(std::abs(z[i]) + eps[i], 0.4);
    CHECK(objective(a, b, z, 2.0, eps, 0.1, Family::half_eps) == doctest::Approx(res + 2 * smoothed).epsilon(1e-14));
    // Denominators taken at the anchor; anchor = z recovers objective().
    CHECK(reweighted_objective(a, b, z, z, 2.0, eps, 0.1, Family::half_eps) ==
          doctest::Approx(objective(a, b, z, 2.0, eps, 0.1, Family::half_eps)).epsilon(1e-15));
}

TEST_CASE("trivial problem is a fixed point") {
    const DenseMatrix a = gaussian_matrix(8, 20, RngSeed{2});
    const Vector b(8, 0.0);
    for (Family f : kAllFamilies) {
        const SolverConfig c = config_for(f, 0.1, 2);
        const SolverState s0 = initial_state(a, b, c, {});
        const SolverState s1 = iterate_once(s0, a, b, c);
        CHECK(s1.z == Vector(20, 0.0));
        CHECK(s1.k == 1);
        const SolverResult res = solve(a, b, c);
        CHECK(res.converged);
        CHECK(res.iterations == 1);
        CHECK(res.z_star == Vector(20, 0.0));
    }
}

TEST_CASE("first step descends on a random instance") {
    const ProblemInstance inst = make_instance(32, 128, 3, 0.0, RngSeed{5});
    const SolverConfig c = config_for(Family::half_eps, 0.1, 3);
    const SolverState s0 = initial_state(inst.a, inst.b, c, {});
    const SolverState s1 = iterate_once(s0, inst.a, inst.b, c);
    const double before = objective(inst.a, inst.b, s0.z, s1.lambda, s1.epsilon, 0.1, Family::half_eps);
    const double after = objective(inst.a, inst.b, s1.z, s1.lambda, s1.epsilon, 0.1, Family::half_eps);
    CHECK(after <= before + 1e-10);
    CHECK(s1.objective == doctest::Approx(after).epsilon(1e-12));
}

TEST_CASE("state invariants along a run") {
    const ProblemInstance inst = make_instance(64, 256, 8, 0.0, RngSeed{6});
    for (Family f : {Family::half_eps, Family::two_thirds_eps}) {
        const SolverConfig c = config_for(f, 0.1, 8);
        SolverState s = initial_state(inst.a, inst.b, c, {});
        const double mu = s.mu;
        for (int k = 0; k < 50; ++k) {
            s = iterate_once(s, inst.a, inst.b, c);
            CHECK(s.mu == mu);
            CHECK(s.lambda >= kLambdaFloor);
            CHECK(s.z.size() == 256);
            for (double e : s.epsilon) CHECK(e >= c.epsilon_floor);
        }
    }
}

TEST_CASE("solve recovers an easy instance") {
    const ProblemInstance inst = make_instance(64, 256, 5, 0.0, RngSeed{7});
    for (Family f : {Family::half_eps, Family::two_thirds_eps, Family::half, Family::two_thirds}) {
        const SolverResult res = solve(inst.a, inst.b, config_for(f, 0.1, 5));
        CHECK(res.converged);
        CHECK(res.termination_reason == Termination::tolerance);
        CHECK(res.trace.size() == res.iterations);
        CHECK(relative_error(res.z_star, inst.z_true) <= 1e-4);
        // last ten steps shrink, up to a small slack
        REQUIRE(res.trace.size() >= 10);
        for (std::size_t i = res.trace.size() - 9; i < res.trace.size(); ++i) {
            CHECK(res.trace[i].step_norm <= res.trace[i - 1].step_norm + 1e-6);
        }
    }
}

TEST_CASE("max_iter = 1 stops after one step") {
    const ProblemInstance inst = make_instance(64, 256, 20, 0.0, RngSeed{8});
    SolverConfig c = config_for(Family::half_eps, 0.1, 20);
    c.max_iter = 1;
    const SolverResult res = solve(inst.a, inst.b, c);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 1);
    CHECK(res.termination_reason == Termination::max_iter);
    CHECK(to_string(res.termination_reason) == "max_iter");
}

TEST_CASE("1/2 and 2/3 rules are the eps rules at p = theta") {
    const ProblemInstance inst = make_instance(32, 128, 3, 0.0, RngSeed{9});
    const std::pair<Family, Family> pairs[] = {{Family::half_eps, Family::half},
                                               {Family::two_thirds_eps, Family::two_thirds}};
    for (auto [eps_rule, plain] : pairs) {
        const SolverConfig ce = config_for(eps_rule, penalty_exponent(plain), 3);
        const SolverConfig cp = config_for(plain, 0.1, 3);
        SolverState se = initial_state(inst.a, inst.b, ce, {});
        SolverState sp = initial_state(inst.a, inst.b, cp, {});
        for (int k = 0; k < 100; ++k) {
            se = iterate_once(se, inst.a, inst.b, ce);
            sp = iterate_once(sp, inst.a, inst.b, cp);
            CHECK(se.z == sp.z);
        }
    }
}

TEST_CASE("frozen iterate reuses lambda and eps") {
    const ProblemInstance inst = make_instance(32, 128, 3, 0.0, RngSeed{10});
    for (Family f : kAllFamilies) {
        const SolverConfig c = config_for(f, 0.1, 3);
        SolverState s = initial_state(inst.a, inst.b, c, {});
        for (int k = 0; k < 5; ++k) s = iterate_once(s, inst.a, inst.b, c);
        const SolverState fr = iterate_frozen(s, inst.a, inst.b, c);
        CHECK(fr.lambda == s.lambda);
        CHECK(fr.epsilon == s.epsilon);
    }
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(validate(config_for(Family::half_eps, 0.1, 3), 10));
    SolverConfig c = config_for(Family::half_eps, 0.1, 10);
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c.sparsity_r = 0;
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c = config_for(Family::half_eps, 0.1, 3);
    c.eta = 1.0;
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c = config_for(Family::half_eps, 1.0, 3);
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c = config_for(Family::half_eps, 0.1, 3);
    c.epsilon_floor = 0.0;
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c = config_for(Family::half_eps, 0.1, 3);
    c.tol = 0.0;
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
    c = config_for(Family::half_eps, 0.1, 3);
    c.max_iter = 0;
    CHECK_THROWS_AS(validate(c, 10), std::invalid_argument);
}
