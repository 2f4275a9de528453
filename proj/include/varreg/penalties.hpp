#pragma once

#include "varreg/signal.hpp"

namespace varreg {

enum class PenaltyKind { quadratic, smoothed_tv, l1 };

enum class SubgradientSource { analytic_gradient, prox_optimality, user_supplied };

struct Subgradient {
  Signal values;
  SubgradientSource source = SubgradientSource::analytic_gradient;
};

// Convex penalty J. quadratic: 0.5*||phi||^2. smoothed_tv: sum of
// sqrt(d_i^2 + beta) * spacing over forward differences d (last difference
// zero). l1: spacing-weighted absolute sum. All gradients/subgradients are
// representers with respect to the grid-weighted inner product.
struct Penalty {
  PenaltyKind kind = PenaltyKind::quadratic;
  double beta = 0.0;  // smoothed_tv only, > 0
};

Penalty make_quadratic();
Penalty make_smoothed_tv(double beta);
Penalty make_l1();

bool is_differentiable(const Penalty& j);
bool has_prox(const Penalty& j);

double eval_penalty(const Penalty& j, const Signal& phi);

// Canonical selection: quadratic -> phi; smoothed_tv -> analytic gradient;
// l1 -> sign(phi) with 0 at kinks.
Subgradient subgradient(const Penalty& j, const Signal& phi);

// argmin_u 0.5*||u - z||^2 + step * J(u). Throws UnsupportedOperationError
// for smoothed_tv, which is handled by gradient steps instead.
Signal prox(const Penalty& j, const Signal& z, double step);

// D_J(u, u*) = J(u) - J(u*) - <p_star, u - u*>, p_star in dJ(u*).
double bregman(const Penalty& j, const Signal& u, const Signal& u_star,
               const Subgradient& p_star);

// <p_u - p_star, u - u*> with canonical subgradients; equals the sum of the
// two one-sided distances.
double bregman_symmetric(const Penalty& j, const Signal& u, const Signal& u_star);

}  // namespace varreg
