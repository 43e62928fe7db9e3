#pragma once

#include <span>

namespace lpthresh {

// Scalar thresholding operators. For a penalty weight lambda > 0 and
// exponent q, each maps an anchor r to
//
//     argmin_b (b - r)^2 + lambda |b|^q
//
// in closed form for q = 1/2 and q = 2/3. At |r| equal to the threshold the
// zero branch is taken.

/// Jump location of the q = 1/2 operator: (54^(1/3) / 4) lambda^(2/3).
double t_half(double lambda);

/// q = 1/2 operator.
double half_threshold(double r, double lambda);

/// Jump location of the q = 2/3 operator: (48^(1/4) / 3) lambda^(3/4).
double t_two_thirds(double lambda);

/// q = 2/3 operator.
double two_thirds_threshold(double r, double lambda);

/// r if |r| > t, else 0.
double hard_threshold(double r, double t);

/// sign(r) max(|r| - t, 0).
double soft_threshold(double r, double t);

namespace detail {

// Raw (unclamped) intermediate quantities of the closed forms, exposed so
// tests can check where clamping is actually needed.
double half_arccos_argument(double r, double lambda);
double two_thirds_arccosh_argument(double r, double lambda);
double two_thirds_radicand(double r, double lambda);

}  // namespace detail

}  // namespace lpthresh
