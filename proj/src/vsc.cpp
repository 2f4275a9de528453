#include "varreg/vsc.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "varreg/errors.hpp"
#include "varreg/linops.hpp"

namespace varreg {

IndexFunction make_index_power(double c, double kappa) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidInputError("index function constant c must be positive and finite");
  }
  if (!(kappa > 0.0) || kappa > 1.0) {
    throw InvalidInputError("index function exponent kappa must lie in (0, 1]");
  }
  return IndexFunction{c, kappa};
}

double eval_index(const IndexFunction& psi, double t) {
  if (!(t >= 0.0)) throw InvalidInputError("index function argument must be non-negative");
  return psi.c * std::pow(t, psi.kappa);
}

namespace {

double nudge(double x, int steps) {
  const double dir = steps > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::abs(steps); ++i) x = std::nextafter(x, dir);
  return x;
}

}  // namespace

VscConstants vsc_constants(const DiscrepancyRadii& radii) {
  validate_radii(radii);
  const double st0 = (radii.tau_lower - 1.0) / radii.tau_upper;
  // The rounded product of (tl-1)/tu and tu/(tl-1) can land one ulp off 1.
  // Walk a few ulps (C first, sigma_tilde only if needed) until the product
  // rounds to exactly 1.0; both stay within 2 ulps of their formulas.
  static const int kSteps[] = {0, 1, -1, 2, -2};
  for (int ds : kSteps) {
    const double st = nudge(st0, ds);
    for (int dc : kSteps) {
      const double c = nudge(1.0 / st, dc);
      if (st * c == 1.0) return VscConstants{st, c};
    }
  }
  throw InvalidInputError("could not build an exactly reciprocal coefficient pair");
}

IndexFit fit_index_power(const std::vector<double>& deltas,
                         const std::vector<double>& values) {
  if (deltas.size() != values.size()) {
    throw InvalidInputError("fit_index_power: deltas and values differ in length");
  }
  if (deltas.size() < 3) {
    throw InsufficientDataError("fit_index_power needs at least 3 points, got " +
                                std::to_string(deltas.size()));
  }
  const std::size_t n = deltas.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(deltas[i]) ||
        !std::isfinite(values[i])) {
      throw InsufficientDataError("fit_index_power needs strictly positive finite points");
    }
    xs[i] = std::log(deltas[i]);
    ys[i] = std::log(values[i]);
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) {
    throw InsufficientDataError("fit_index_power: all deltas equal, slope undetermined");
  }
  const double kappa_hat = sxy / sxx;
  const double kappa = std::min(std::max(kappa_hat, 1e-6), 1.0);
  const bool clamped = kappa != kappa_hat;
  if (clamped) {
    std::fprintf(stderr, "warning: fitted index exponent %.6g clamped to %.6g\n",
                 kappa_hat, kappa);
  }
  // least-squares intercept for the (possibly clamped) exponent
  const double logc = ybar - kappa * xbar;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (logc + kappa * xs[i]);
    ss += e * e;
  }
  IndexFit fit;
  fit.psi = make_index_power(std::exp(logc), kappa);
  fit.fit_residual = std::sqrt(ss / static_cast<double>(n));
  fit.clamped = clamped;
  return fit;
}

ConditionCheck check_vsc_condition(const Penalty& penalty, const Signal& phi_true,
                                   const Signal& phi_reg, const IndexFunction& psi,
                                   double C, double delta) {
  if (!(C > 0.0)) throw InvalidInputError("C must be positive");
  if (!(delta > 0.0)) throw InvalidInputError("delta must be positive");
  const Subgradient p = subgradient(penalty, phi_true);
  Signal diff = phi_true;
  if (phi_reg.size() != phi_true.size()) {
    throw InvalidInputError("phi_true and phi_reg differ in size");
  }
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= phi_reg.values[i];
  ConditionCheck c;
  c.lhs = inner(p.values, diff);
  c.rhs = C * eval_index(psi, delta);
  c.holds = c.lhs <= c.rhs + 1e-10;
  return c;
}

RecordQuantities record_quantities(const LinearMap& op, const Penalty& penalty,
                                   const Signal& phi_true, const Signal& phi_reg,
                                   double alpha, double delta) {
  if (phi_true.size() != op.in_dim || phi_reg.size() != op.in_dim) {
    throw InvalidInputError("phi dimension does not match operator input dimension");
  }
  if (!(alpha > 0.0) || !(delta > 0.0)) {
    throw InvalidInputError("alpha and delta must be positive");
  }
  RecordQuantities q;
  q.delta = delta;
  q.alpha = alpha;
  q.j_reg = eval_penalty(penalty, phi_reg);
  q.j_true = eval_penalty(penalty, phi_true);
  const Subgradient p_true = subgradient(penalty, phi_true);
  const Subgradient p_reg = subgradient(penalty, phi_reg);
  q.bregman_fwd = bregman(penalty, phi_reg, phi_true, p_true);
  q.bregman_rev = bregman(penalty, phi_true, phi_reg, p_reg);
  q.bregman_sym = bregman_symmetric(penalty, phi_reg, phi_true);
  Signal diff_true_reg = phi_true;
  for (std::size_t i = 0; i < diff_true_reg.size(); ++i) {
    diff_true_reg.values[i] -= phi_reg.values[i];
  }
  q.inner_p_true_diff = inner(p_true.values, diff_true_reg);
  q.total_error = norm(diff_true_reg);
  const Signal t_reg = apply(op, phi_reg);
  const Signal t_true = apply(op, phi_true);
  Signal dd = t_reg;
  for (std::size_t i = 0; i < dd.size(); ++i) dd.values[i] -= t_true.values[i];
  q.discrepancy_true = norm(dd);
  return q;
}

TheoremChecklist check_theorems(const RecordQuantities& q,
                                const DiscrepancyRadii& radii,
                                const IndexFunction& psi) {
  const VscConstants vc = vsc_constants(radii);
  const double st = vc.sigma_tilde;
  const double tl = radii.tau_lower;
  const double tu = radii.tau_upper;
  const double psi_d = eval_index(psi, q.delta);
  const double psi_disc = eval_index(psi, q.discrepancy_true);
  const double jdiff = q.j_reg - q.j_true;

  const auto entry = [](double lhs, double rhs) {
    const double slack = rhs - lhs;
    return CheckEntry{slack >= -1e-8, slack};
  };

  TheoremChecklist tc;
  tc.vsc_condition = entry(q.inner_p_true_diff, vc.C * psi_d);
  tc.vsc_inequality = entry(st * q.bregman_fwd, jdiff + psi_disc);
  tc.vsc_inequality_half = entry(0.5 * st * q.bregman_fwd, jdiff + psi_disc);
  tc.jdiff_psi = entry(jdiff, (2.0 / st) / (tl - 1.0) * psi_d);
  tc.jdiff_delta2 = entry(jdiff, (1.0 + tu) * (1.0 + tu) * q.delta * q.delta / q.alpha);
  const double fwd_rhs = ((2.0 / st) / (tl - 1.0) + (tu + 1.0)) * psi_d;
  const double rev_rhs = ((tu + 1.0) + (4.0 / st) * tu * (tu + 1.0) / (tl - 1.0)) * psi_d;
  tc.bregman_forward = entry(q.bregman_fwd, fwd_rhs);
  tc.bregman_reverse = entry(q.bregman_rev, rev_rhs);
  tc.bregman_symmetric = entry(q.bregman_sym, fwd_rhs + rev_rhs);
  tc.reverse_vs_index = entry(q.bregman_rev, psi_d);
  return tc;
}

}  // namespace varreg
