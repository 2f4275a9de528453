#pragma once

namespace varreg {

// Power-type index function psi(t) = c * t^kappa with c > 0 and
// kappa in (0, 1]: zero at zero, increasing, concave, so
// psi(a*t) <= a*psi(t) for a >= 1.
struct IndexFunction {
  double c = 1.0;
  double kappa = 1.0;
};

IndexFunction make_index_power(double c, double kappa);

// Defined for t >= 0 only; negative arguments are rejected.
double eval_index(const IndexFunction& psi, double t);

}  // namespace varreg
