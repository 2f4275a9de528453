#include "varreg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "varreg/errors.hpp"

namespace varreg {

void validate_radii(const DiscrepancyRadii& radii) {
  if (!std::isfinite(radii.tau_lower) || !std::isfinite(radii.tau_upper) ||
      !(radii.tau_lower > 1.0) || !(radii.tau_upper >= radii.tau_lower)) {
    throw InvalidInputError("discrepancy radii need 1 < tau_lower <= tau_upper < inf");
  }
}

namespace {

struct Probe {
  double alpha = 0.0;
  double residual = 0.0;
};

double window_distance(double r, double lo, double hi) {
  if (r < lo) return lo - r;
  if (r > hi) return r - hi;
  return 0.0;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

MdpResult select_alpha_mdp(const LinearMap& op, const Penalty& penalty,
                           const Signal& data, double delta,
                           const DiscrepancyRadii& radii,
                           const SearchSettings& search,
                           const SolverSettings& solver) {
  validate_radii(radii);
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidInputError("noise level delta must be positive and finite");
  }
  if (!(search.expansion > 1.0)) throw InvalidInputError("search expansion must exceed 1");
  if (!(search.bracket_tol > 0.0)) throw InvalidInputError("search bracket_tol must be positive");
  if (search.max_probes < 1) throw InvalidInputError("search max_probes must be at least 1");
  if (data.size() != op.out_dim) {
    throw InvalidInputError("data dimension does not match operator output dimension");
  }
  const double data_norm = norm(data);
  if (delta >= data_norm) {
    throw NoAdmissibleAlphaError("noise level delta = " + fmt(delta) +
                                 " is not below ||data|| = " + fmt(data_norm) +
                                 "; the zero reconstruction already satisfies the window");
  }

  const double lo_w = radii.tau_lower * delta;
  const double hi_w = radii.tau_upper * delta;

  std::vector<Probe> history;
  RegularizedSolution current;
  bool have_warm = false;
  Signal warm;
  int evaluations = 0;

  // best probe by distance to the window, kept for narrow-window acceptance
  double best_dist = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0;
  RegularizedSolution best_sol;

  const auto probe = [&](double alpha) -> double {
    VariationalProblem prob{op, penalty, data, alpha};
    current = minimize_tikhonov(prob, solver, have_warm ? &warm : nullptr);
    ++evaluations;
    if (!current.converged) {
      throw SolverProbeError("discrepancy search probe at alpha = " + fmt(alpha) +
                             " did not converge (defect " + fmt(current.optimality_defect) +
                             " after " + std::to_string(current.iterations) + " iterations)");
    }
    warm = current.phi;
    have_warm = true;
    history.push_back({alpha, current.residual_norm});
    const double d = window_distance(current.residual_norm, lo_w, hi_w);
    if (d < best_dist) {
      best_dist = d;
      best_alpha = alpha;
      best_sol = current;
    }
    return current.residual_norm;
  };

  const auto audited = [&](MdpResult r) {
    std::vector<Probe> by_alpha = history;
    std::sort(by_alpha.begin(), by_alpha.end(),
              [](const Probe& a, const Probe& b) { return a.alpha < b.alpha; });
    for (std::size_t i = 0; i + 1 < by_alpha.size(); ++i) {
      const double slack = 10.0 * solver.tol * (1.0 + by_alpha[i].residual);
      if (by_alpha[i + 1].residual < by_alpha[i].residual - slack) {
        ++r.monotonicity_warnings;
        std::fprintf(stderr,
                     "warning: residual not monotone in alpha: r(%.6g) = %.6g > r(%.6g) = %.6g\n",
                     by_alpha[i].alpha, by_alpha[i].residual, by_alpha[i + 1].alpha,
                     by_alpha[i + 1].residual);
      }
    }
    r.evaluations = evaluations;
    return r;
  };

  const auto no_alpha = [&](const std::string& what) -> NoAdmissibleAlphaError {
    const auto lo = std::min_element(history.begin(), history.end(),
                                     [](const Probe& a, const Probe& b) { return a.alpha < b.alpha; });
    const auto hi = std::max_element(history.begin(), history.end(),
                                     [](const Probe& a, const Probe& b) { return a.alpha < b.alpha; });
    return NoAdmissibleAlphaError(
        what + " after " + std::to_string(evaluations) + " probes; window [" + fmt(lo_w) +
        ", " + fmt(hi_w) + "], residual " + fmt(lo->residual) + " at alpha = " + fmt(lo->alpha) +
        ", residual " + fmt(hi->residual) + " at alpha = " + fmt(hi->alpha));
  };

  double alpha = search.alpha0.value_or(delta * delta);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("search alpha0 must be positive and finite");
  }

  double r = probe(alpha);
  if (window_distance(r, lo_w, hi_w) == 0.0) {
    return audited({alpha, current, alpha, alpha, 0, 0});
  }

  // geometric expansion toward the window; residual grows with alpha
  double a_lo = 0.0, a_hi = 0.0;  // residual below window at a_lo, above at a_hi
  if (r < lo_w) {
    a_lo = alpha;
    while (true) {
      if (evaluations >= search.max_probes) throw no_alpha("bracket expansion exhausted");
      alpha *= search.expansion;
      if (!std::isfinite(alpha)) throw no_alpha("bracket expansion overflowed");
      r = probe(alpha);
      if (window_distance(r, lo_w, hi_w) == 0.0) {
        return audited({alpha, current, a_lo, alpha, 0, 0});
      }
      if (r > hi_w) {
        a_hi = alpha;
        break;
      }
      a_lo = alpha;
    }
  } else {
    a_hi = alpha;
    while (true) {
      if (evaluations >= search.max_probes) throw no_alpha("bracket expansion exhausted");
      alpha /= search.expansion;
      if (alpha < 1e-300) throw no_alpha("bracket expansion underflowed");
      r = probe(alpha);
      if (window_distance(r, lo_w, hi_w) == 0.0) {
        return audited({alpha, current, alpha, a_hi, 0, 0});
      }
      if (r < lo_w) {
        a_lo = alpha;
        break;
      }
      a_hi = alpha;
    }
  }

  // bisection on log(alpha)
  while (evaluations < search.max_probes && std::log(a_hi / a_lo) > search.bracket_tol) {
    const double mid = std::sqrt(a_lo * a_hi);
    r = probe(mid);
    if (window_distance(r, lo_w, hi_w) == 0.0) {
      return audited({mid, current, a_lo, a_hi, 0, 0});
    }
    if (r < lo_w) a_lo = mid;
    else a_hi = mid;
  }

  // bracket collapsed without landing inside: accept the nearest probe when
  // it misses the window by no more than the search resolution
  const double accept_slack = 2.0 * search.bracket_tol * hi_w + 10.0 * solver.tol;
  if (best_dist <= accept_slack) {
    return audited({best_alpha, best_sol, a_lo, a_hi, 0, 0});
  }
  throw no_alpha("bisection stalled outside the window");
}

ConsequenceCheck mdp_consequence_check(const MdpResult& result, const LinearMap& op,
                                       const Signal& phi_true, double delta,
                                       const DiscrepancyRadii& radii) {
  validate_radii(radii);
  if (!(delta > 0.0)) throw InvalidInputError("delta must be positive");
  if (phi_true.size() != op.in_dim) {
    throw InvalidInputError("phi_true dimension does not match operator input dimension");
  }
  const Signal t_reg = apply(op, result.solution.phi);
  const Signal t_true = apply(op, phi_true);
  Signal diff = t_reg;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= t_true.values[i];
  ConsequenceCheck c;
  c.discrepancy = norm(diff);
  c.upper_slack = (radii.tau_upper + 1.0) * delta - c.discrepancy;
  c.lower_slack = c.discrepancy - (radii.tau_lower - 1.0) * delta;
  c.upper_ok = c.upper_slack >= -1e-8;
  c.lower_ok = c.lower_slack >= -1e-8;
  return c;
}

AlphaBounds compute_alpha_bounds(const DiscrepancyRadii& radii, double sigma,
                                 const IndexFunction& psi, double j_true,
                                 double delta, AlphaMaxVariant variant) {
  validate_radii(radii);
  if (!(sigma > 0.0) || sigma > 1.0) throw InvalidInputError("sigma must lie in (0, 1]");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInputError("delta must be positive and finite");
  if (!(j_true >= 0.0) || !std::isfinite(j_true)) throw InvalidInputError("J_true must be non-negative and finite");

  const double tl = radii.tau_lower;
  const double tu = radii.tau_upper;
  const double psi_at_delta = eval_index(psi, delta);
  const double psi_at_tl = eval_index(psi, (tl - 1.0) * delta);
  if (!(psi_at_delta > 0.0) || !(psi_at_tl > 0.0)) {
    throw InvalidInputError("index function must be positive at positive arguments");
  }

  AlphaBounds b;
  b.hm_lower = 0.25 * (tl * tl - 1.0) / (tl * tl + 1.0) * delta * delta / psi_at_tl;
  b.new_lower = 0.25 * sigma * (tl - 1.0) * delta * delta / psi_at_delta;
  const double factor = (variant == AlphaMaxVariant::printed) ? (tl - 1.0) : 1.0 / (tl - 1.0);
  b.alpha_max = 1.0 / ((8.0 / sigma) * factor * psi_at_delta + j_true);
  b.index_lower_at_delta = 0.25 * sigma * j_true * delta * delta;
  return b;
}

}  // namespace varreg
