#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varreg/mdp.hpp"
#include "varreg/vsc.hpp"

namespace varreg {

enum class PhantomName { step, bump, ramp };

struct PhantomSpec {
  PhantomName name = PhantomName::step;
  std::size_t dimension = 32;
};

// step: 0 on the first half, 1 on the second. bump: 1 on the middle half.
// ramp: linear 0 to 1.
Signal make_phantom(const PhantomSpec& spec, double grid_spacing = 1.0);

struct Instance {
  Signal phi_true;
  Signal f_true;   // T phi_true, exact data
  double j_true = 0.0;
};

Instance make_instance(const LinearMap& op, const Penalty& penalty,
                       const PhantomSpec& spec, double grid_spacing = 1.0);

// f_true + noise with exactly ||noise|| = delta; deterministic in
// (seed, delta, dimension).
Signal add_noise_exact(const Signal& f_true, double delta, std::uint64_t seed);

struct DeltaGrid {
  double delta_max = 0.2;
  double factor = 0.5;  // in (0,1)
  int count = 6;        // >= 3
};

enum class FitTarget { bregman_fwd, bregman_rev, bregman_sym, jdiff, total_error };

std::string fit_target_name(FitTarget t);

struct SweepConfig {
  LinearMap op;
  Penalty penalty;
  PhantomSpec phantom;
  double grid_spacing = 1.0;
  DiscrepancyRadii radii;
  DeltaGrid grid;
  std::uint64_t seed = 0;
  double noise_fill = 1.0;  // realized noise norm = noise_fill * delta
  FitTarget fit_target = FitTarget::bregman_fwd;
  std::optional<IndexFunction> psi_override;  // skips fitting when set
  AlphaMaxVariant alpha_max_variant = AlphaMaxVariant::printed;
  SolverSettings solver;
  SearchSettings search;
};

struct SweepRecord {
  double delta = 0.0;
  bool ok = false;
  std::string failure_reason;  // set when !ok; all other fields undefined

  double alpha = 0.0;
  double residual_norm = 0.0;
  RecordQuantities quantities;
  bool error_le_bregman = false;  // ||phi_reg-phi_true|| <= D_fwd, recorded only
  AlphaBounds bounds;
  TheoremChecklist checklist;
  std::vector<double> phi_reg;
  int iterations = 0;
  double defect = 0.0;
  bool converged = false;
  int evaluations = 0;  // discrepancy-search solves
  int monotonicity_warnings = 0;
};

struct RateFit {
  double slope = 0.0;
  double residual = 0.0;  // rms log-space misfit
};

// Log-log slopes against delta over the surviving records; values are
// clipped at 1e-16 before taking logs.
struct RateSummary {
  RateFit bregman_fwd, bregman_rev, bregman_sym, jdiff, total_error, discrepancy;
};

RateSummary fit_rates(const std::vector<SweepRecord>& records);

struct FlagTally {
  int pass = 0;
  int fail = 0;
};

struct SweepReport {
  std::vector<SweepRecord> records;  // sorted by descending delta
  IndexFit fitted_psi;
  FitTarget fit_target = FitTarget::bregman_fwd;
  RateSummary rates;
  double j_true = 0.0;
  double sigma_tilde = 0.0;
};

// Noise draw and parameter search per grid point (streams derived from
// (seed, point index), so points are order-independent and may run in
// parallel), then an index-function fit over the chosen target, then the
// inequality checklist and parameter bounds per record.
SweepReport run_sweep(const SweepConfig& cfg);

// Tallies over successful records, one pass/fail pair per checklist flag,
// in checklist order.
std::vector<std::pair<std::string, FlagTally>> tally_flags(const SweepReport& report);

// Deterministic serializations: same report, same bytes.
std::string report_json(const SweepReport& report, const nlohmann::json& config_echo);
std::string records_csv(const SweepReport& report);

}  // namespace varreg
