#include "varreg/penalties.hpp"

#include <cmath>

#include "varreg/errors.hpp"

namespace varreg {

Penalty make_quadratic() { return Penalty{PenaltyKind::quadratic, 0.0}; }

Penalty make_smoothed_tv(double beta) {
  if (!(beta > 0.0)) throw InvalidInputError("smoothed_tv beta must be positive");
  return Penalty{PenaltyKind::smoothed_tv, beta};
}

Penalty make_l1() { return Penalty{PenaltyKind::l1, 0.0}; }

bool is_differentiable(const Penalty& j) { return j.kind != PenaltyKind::l1; }

bool has_prox(const Penalty& j) { return j.kind != PenaltyKind::smoothed_tv; }

// Forward differences (phi[i+1]-phi[i])/h, last entry zero.
static std::vector<double> forward_diff(const Signal& phi) {
  const std::size_t n = phi.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = (phi.values[i + 1] - phi.values[i]) / phi.grid_spacing;
  }
  return d;
}

double eval_penalty(const Penalty& j, const Signal& phi) {
  const double h = phi.grid_spacing;
  switch (j.kind) {
    case PenaltyKind::quadratic: {
      double s = 0.0;
      for (double v : phi.values) s += v * v;
      return 0.5 * s * h;
    }
    case PenaltyKind::l1: {
      double s = 0.0;
      for (double v : phi.values) s += std::abs(v);
      return s * h;
    }
    case PenaltyKind::smoothed_tv: {
      const std::vector<double> d = forward_diff(phi);
      double s = 0.0;
      for (double di : d) s += std::sqrt(di * di + j.beta);
      return s * h;
    }
  }
  throw InvalidInputError("unknown penalty kind");
}

Subgradient subgradient(const Penalty& j, const Signal& phi) {
  Subgradient p;
  p.values.grid_spacing = phi.grid_spacing;
  p.values.values.assign(phi.size(), 0.0);
  p.source = SubgradientSource::analytic_gradient;
  switch (j.kind) {
    case PenaltyKind::quadratic:
      p.values.values = phi.values;
      return p;
    case PenaltyKind::l1:
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double v = phi.values[i];
        p.values.values[i] = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      }
      return p;
    case PenaltyKind::smoothed_tv: {
      const std::size_t n = phi.size();
      const double h = phi.grid_spacing;
      const std::vector<double> d = forward_diff(phi);
      std::vector<double> w(n, 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) w[i] = d[i] / std::sqrt(d[i] * d[i] + j.beta);
      // gradient in the grid-weighted inner product
      for (std::size_t k = 0; k < n; ++k) {
        const double wm = (k == 0) ? 0.0 : w[k - 1];
        p.values.values[k] = (wm - w[k]) / h;
      }
      return p;
    }
  }
  throw InvalidInputError("unknown penalty kind");
}

Signal prox(const Penalty& j, const Signal& z, double step) {
  if (!(step > 0.0)) throw InvalidInputError("prox step must be positive");
  Signal u = z;
  switch (j.kind) {
    case PenaltyKind::quadratic:
      for (double& v : u.values) v /= (1.0 + step);
      return u;
    case PenaltyKind::l1:
      for (double& v : u.values) {
        if (v > step) v -= step;
        else if (v < -step) v += step;
        else v = 0.0;
      }
      return u;
    case PenaltyKind::smoothed_tv:
      throw UnsupportedOperationError("smoothed_tv has no closed-form prox; use gradient handling");
  }
  throw InvalidInputError("unknown penalty kind");
}

double bregman(const Penalty& j, const Signal& u, const Signal& u_star,
               const Subgradient& p_star) {
  if (u.size() != u_star.size() || u.size() != p_star.values.size()) {
    throw InvalidInputError("bregman: size mismatch between points and subgradient");
  }
  Signal diff = u;
  for (std::size_t i = 0; i < u.size(); ++i) diff.values[i] -= u_star.values[i];
  return eval_penalty(j, u) - eval_penalty(j, u_star) - inner(p_star.values, diff);
}

double bregman_symmetric(const Penalty& j, const Signal& u, const Signal& u_star) {
  if (u.size() != u_star.size()) {
    throw InvalidInputError("bregman_symmetric: size mismatch");
  }
  const Subgradient pu = subgradient(j, u);
  const Subgradient ps = subgradient(j, u_star);
  Signal pdiff = pu.values;
  Signal udiff = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    pdiff.values[i] -= ps.values.values[i];
    udiff.values[i] -= u_star.values[i];
  }
  return inner(pdiff, udiff);
}

}  // namespace varreg
