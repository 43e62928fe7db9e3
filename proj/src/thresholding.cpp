#include "lpthresh/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lpthresh {

namespace {

void require_positive(double lambda, const char* where) {
    if (!(lambda > 0.0)) {
        throw std::domain_error(std::string(where) + ": lambda must be positive, got " + std::to_string(lambda));
    }
}

// The exact operators satisfy |h(r)| < |r|; rounding can push the last ulp
// over, so the magnitude is capped.
double shrink(double magnitude, double r) { return std::copysign(std::min(magnitude, std::abs(r)), r); }

const double kHalfCoeff = std::cbrt(54.0) / 4.0;
const double kTwoThirdsCoeff = std::pow(48.0, 0.25) / 3.0;

}  // namespace

double t_half(double lambda) {
    require_positive(lambda, "t_half");
    return kHalfCoeff * std::cbrt(lambda * lambda);
}

double t_two_thirds(double lambda) {
    require_positive(lambda, "t_two_thirds");
    return kTwoThirdsCoeff * std::pow(lambda, 0.75);
}

namespace detail {

double half_arccos_argument(double r, double lambda) {
    const double s = std::abs(r) / 3.0;
    return (lambda / 8.0) / (s * std::sqrt(s));
}

double two_thirds_arccosh_argument(double r, double lambda) {
    return (27.0 / 16.0) * r * r / (lambda * std::sqrt(lambda));
}

double two_thirds_radicand(double r, double lambda) {
    const double c = std::max(two_thirds_arccosh_argument(r, lambda), 1.0);
    const double phi = (2.0 / std::sqrt(3.0)) * std::pow(lambda, 0.25) * std::sqrt(std::cosh(std::acosh(c) / 3.0));
    return 2.0 * std::abs(r) / phi - phi * phi;
}

}  // namespace detail

double half_threshold(double r, double lambda) {
    if (std::abs(r) <= t_half(lambda)) {
        return 0.0;
    }
    const double a = std::clamp(detail::half_arccos_argument(r, lambda), -1.0, 1.0);
    const double angle = 2.0 * std::numbers::pi / 3.0 - (2.0 / 3.0) * std::acos(a);
    const double f = (2.0 / 3.0) * std::abs(r) * (1.0 + std::cos(angle));
    return shrink(f, r);
}

double two_thirds_threshold(double r, double lambda) {
    if (std::abs(r) <= t_two_thirds(lambda)) {
        return 0.0;
    }
    const double c = std::max(detail::two_thirds_arccosh_argument(r, lambda), 1.0);
    const double phi = (2.0 / std::sqrt(3.0)) * std::pow(lambda, 0.25) * std::sqrt(std::cosh(std::acosh(c) / 3.0));
    const double radicand = std::max(2.0 * std::abs(r) / phi - phi * phi, 0.0);
    const double base = phi + std::sqrt(radicand);
    return shrink(base * base * base / 8.0, r);
}

double hard_threshold(double r, double t) {
    if (t < 0.0) {
        throw std::domain_error("hard_threshold: threshold must be nonnegative");
    }
    return std::abs(r) > t ? r : 0.0;
}

double soft_threshold(double r, double t) {
    if (t < 0.0) {
        throw std::domain_error("soft_threshold: threshold must be nonnegative");
    }
    const double m = std::abs(r) - t;
    return m > 0.0 ? std::copysign(m, r) : 0.0;
}

}  // namespace lpthresh
