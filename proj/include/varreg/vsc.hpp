#pragma once

#include <vector>

#include "varreg/index_function.hpp"
#include "varreg/mdp.hpp"
#include "varreg/penalties.hpp"

namespace varreg {

// Coefficient pair for variational source condition checks under the
// discrepancy principle: sigma_tilde = (tau_lower - 1) / tau_upper and
// C = tau_upper / (tau_lower - 1), constructed so that the rounded product
// sigma_tilde * C is exactly 1.0.
struct VscConstants {
  double sigma_tilde = 0.0;
  double C = 0.0;
};

VscConstants vsc_constants(const DiscrepancyRadii& radii);

struct IndexFit {
  IndexFunction psi;
  double fit_residual = 0.0;  // rms log-space misfit of the returned fit
  bool clamped = false;       // kappa fell outside (0, 1] and was clamped
};

// Log-log least squares for psi(t) = c * t^kappa on (delta, value) pairs;
// needs >= 3 strictly positive points. When kappa is clamped, c is refit
// with kappa held fixed.
IndexFit fit_index_power(const std::vector<double>& deltas,
                         const std::vector<double>& values);

struct ConditionCheck {
  double lhs = 0.0;  // <p, phi_true - phi_reg>, p in dJ(phi_true)
  double rhs = 0.0;  // C * psi(delta)
  bool holds = false;
};

ConditionCheck check_vsc_condition(const Penalty& penalty,
                                   const Signal& phi_true,
                                   const Signal& phi_reg,
                                   const IndexFunction& psi, double C,
                                   double delta);

// Scalar quantities of one regularized reconstruction against its ground
// truth; everything the inequality checks need, nothing more.
struct RecordQuantities {
  double delta = 0.0;
  double alpha = 0.0;
  double j_reg = 0.0;
  double j_true = 0.0;
  double bregman_fwd = 0.0;        // D_J(phi_reg, phi_true)
  double bregman_rev = 0.0;        // D_J(phi_true, phi_reg)
  double bregman_sym = 0.0;
  double inner_p_true_diff = 0.0;  // <p_true, phi_true - phi_reg>
  double discrepancy_true = 0.0;   // ||T phi_reg - T phi_true||
  double total_error = 0.0;        // ||phi_reg - phi_true||
};

RecordQuantities record_quantities(const LinearMap& op, const Penalty& penalty,
                                   const Signal& phi_true,
                                   const Signal& phi_reg, double alpha,
                                   double delta);

struct CheckEntry {
  bool ok = false;
  double slack = 0.0;  // rhs - lhs; ok iff slack >= -1e-8
};

// One entry per inequality, each recorded as slack = rhs - lhs.
//   vsc_condition:      <p, phi_true-phi_reg>       vs C * psi(delta)
//   vsc_inequality:     sigma_tilde * D_fwd          vs (J_reg - J_true) + psi(disc)
//   vsc_inequality_half: same with sigma_tilde/2     (auxiliary column)
//   jdiff_psi:          J_reg - J_true               vs (2/sigma_tilde)/(tau_lower-1) * psi(delta)
//   jdiff_delta2:       J_reg - J_true               vs (1+tau_upper)^2 * delta^2 / alpha
//   bregman_forward:    D_fwd  vs ((2/sigma_tilde)/(tau_lower-1) + tau_upper+1) * psi(delta)
//   bregman_reverse:    D_rev  vs (tau_upper+1 + (4/sigma_tilde)*tau_upper*(tau_upper+1)/(tau_lower-1)) * psi(delta)
//   bregman_symmetric:  D_sym  vs sum of the two Bregman bounds
//   reverse_vs_index:   D_rev  vs psi(delta)
struct TheoremChecklist {
  CheckEntry vsc_condition;
  CheckEntry vsc_inequality;
  CheckEntry vsc_inequality_half;
  CheckEntry jdiff_psi;
  CheckEntry jdiff_delta2;
  CheckEntry bregman_forward;
  CheckEntry bregman_reverse;
  CheckEntry bregman_symmetric;
  CheckEntry reverse_vs_index;
};

TheoremChecklist check_theorems(const RecordQuantities& q,
                                const DiscrepancyRadii& radii,
                                const IndexFunction& psi);

}  // namespace varreg
