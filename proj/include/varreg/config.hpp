#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "varreg/harness.hpp"

namespace varreg {

// Typed view of the single JSON config document shared by all subcommands.
// Parsing is strict: unknown keys anywhere raise ConfigError naming the
// offending path, as do type and range violations. Sections a given
// subcommand does not use may still be present.
struct RunConfig {
  nlohmann::json raw;  // normalized echo for reports

  nlohmann::json op_spec;  // validated {"kind": ...} object
  Penalty penalty;
  std::optional<PhantomSpec> phantom;
  std::optional<std::vector<double>> data;  // explicit measurement vector
  double grid_spacing = 1.0;

  std::optional<double> noise_delta;
  std::uint64_t noise_seed = 0;
  double noise_fill = 1.0;

  std::optional<DiscrepancyRadii> radii;
  SolverSettings solver;
  SearchSettings search;

  std::optional<DeltaGrid> sweep_grid;
  FitTarget fit_target = FitTarget::bregman_fwd;
  std::optional<IndexFunction> psi_override;

  std::optional<IndexFunction> psi;  // for single-run parameter bounds
  AlphaMaxVariant alpha_max_variant = AlphaMaxVariant::printed;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

// Operator construction; convolution needs the signal length, dense ignores
// it. Dense matrices are rank-checked here.
LinearMap build_operator(const RunConfig& cfg, std::size_t n);

// Measurement signal for single solves: explicit data if present, else
// phantom + exact-norm noise (requires noise.delta). Returns the signal and
// the noise level to use for parameter choice.
struct Measurement {
  Signal data;
  double delta = 0.0;
};
Measurement build_measurement(const RunConfig& cfg, const LinearMap& op);

// Assembled harness input; requires phantom, radii and sweep sections.
SweepConfig build_sweep_config(const RunConfig& cfg);

}  // namespace varreg
