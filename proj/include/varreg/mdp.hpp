#pragma once

#include <optional>

#include "varreg/index_function.hpp"
#include "varreg/solver.hpp"

namespace varreg {

// Residual window multipliers 1 < tau_lower <= tau_upper for the
// discrepancy principle: accept alpha when
// tau_lower * delta <= ||T phi_alpha - data|| <= tau_upper * delta.
struct DiscrepancyRadii {
  double tau_lower = 1.5;
  double tau_upper = 2.0;
};

void validate_radii(const DiscrepancyRadii& radii);

struct SearchSettings {
  std::optional<double> alpha0;  // default delta^2
  double expansion = 10.0;       // geometric bracket growth factor
  double bracket_tol = 1e-3;     // relative log-width stop for bisection
  int max_probes = 60;
};

struct MdpResult {
  double alpha = 0.0;
  RegularizedSolution solution;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  int evaluations = 0;
  // residual-vs-alpha monotonicity violations observed during the search;
  // reported, never fatal
  int monotonicity_warnings = 0;
};

// Residual window search: probe alpha0, expand the bracket geometrically in
// the indicated direction, then bisect on log(alpha) with warm-started
// solves. Throws NoAdmissibleAlphaError when no bracket exists within the
// probe budget or when delta >= ||data||; a non-converged probe throws
// SolverProbeError with the probe's alpha.
MdpResult select_alpha_mdp(const LinearMap& op, const Penalty& penalty,
                           const Signal& data, double delta,
                           const DiscrepancyRadii& radii,
                           const SearchSettings& search = {},
                           const SolverSettings& solver = {});

struct ConsequenceCheck {
  double discrepancy = 0.0;  // ||T phi_alpha - T phi_true||
  double upper_slack = 0.0;  // (tau_upper + 1) * delta - discrepancy
  double lower_slack = 0.0;  // discrepancy - (tau_lower - 1) * delta
  bool upper_ok = false;
  bool lower_ok = false;
};

// Window membership forces (tau_lower - 1) delta <= ||T phi_alpha - T
// phi_true|| <= (tau_upper + 1) delta; slacks flagged at -1e-8.
ConsequenceCheck mdp_consequence_check(const MdpResult& result,
                                       const LinearMap& op,
                                       const Signal& phi_true, double delta,
                                       const DiscrepancyRadii& radii);

enum class AlphaMaxVariant { printed, corrected };

// Regularization-parameter bounds at noise level delta, all evaluated with
// the supplied coefficient sigma and index function psi.
struct AlphaBounds {
  // 0.25 * (tau_lower^2-1)/(tau_lower^2+1) * delta^2 / psi((tau_lower-1)*delta)
  double hm_lower = 0.0;
  // (sigma/4) * (tau_lower - 1) * delta^2 / psi(delta)
  double new_lower = 0.0;
  // 1 / ((8/sigma) * (tau_lower - 1) * psi(delta) + J_true); the corrected
  // variant replaces (tau_lower - 1) by its reciprocal
  double alpha_max = 0.0;
  // (sigma/4) * J_true * delta^2, a lower bound on psi(delta)
  double index_lower_at_delta = 0.0;
};

AlphaBounds compute_alpha_bounds(const DiscrepancyRadii& radii, double sigma,
                                 const IndexFunction& psi, double j_true,
                                 double delta,
                                 AlphaMaxVariant variant = AlphaMaxVariant::printed);

}  // namespace varreg
