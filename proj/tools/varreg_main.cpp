// varreg: solve / mdp / sweep / verify over JSON configs.
//
// Exit codes: 0 success (all checks pass), 1 config error, 2 computation
// failure, 3 no admissible alpha, 4 verification flags failed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "varreg/config.hpp"
#include "varreg/errors.hpp"
#include "varreg/harness.hpp"
#include "varreg/mdp.hpp"
#include "varreg/solver.hpp"
#include "varreg/vsc.hpp"

namespace {

using nlohmann::json;
using namespace varreg;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::size_t domain_hint(const RunConfig& cfg) {
  if (cfg.phantom) return cfg.phantom->dimension;
  if (cfg.data) return cfg.data->size();
  return 0;
}

json solution_json(const RegularizedSolution& sol) {
  return json{{"phi", sol.phi.values},
              {"objective", sol.objective_value},
              {"residual_norm", sol.residual_norm},
              {"penalty_value", sol.penalty_value},
              {"optimality_defect", sol.optimality_defect},
              {"iterations", sol.iterations},
              {"converged", sol.converged}};
}

int cmd_solve(const std::string& config_path, double alpha,
              const std::string& out_path) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be positive");
  }
  const RunConfig cfg = load_config_file(config_path);
  const LinearMap op = build_operator(cfg, domain_hint(cfg));
  const Measurement m = build_measurement(cfg, op);
  const VariationalProblem problem{op, cfg.penalty, m.data, alpha};
  const RegularizedSolution sol = minimize_tikhonov(problem, cfg.solver);

  json out = solution_json(sol);
  out["alpha"] = alpha;
  out["config"] = cfg.raw;
  write_text(out_path, out.dump(2) + "\n");
  if (!sol.converged) {
    std::fprintf(stderr, "solver did not converge: defect %.6g after %d iterations\n",
                 sol.optimality_defect, sol.iterations);
    return 2;
  }
  std::printf("solved: objective %.17g, residual %.17g, %d iterations\n",
              sol.objective_value, sol.residual_norm, sol.iterations);
  return 0;
}

int cmd_mdp(const std::string& config_path, const std::string& out_path) {
  const RunConfig cfg = load_config_file(config_path);
  if (!cfg.radii) throw ConfigError("mdp needs a radii section");
  const LinearMap op = build_operator(cfg, domain_hint(cfg));
  const Measurement m = build_measurement(cfg, op);
  if (!(m.delta > 0.0)) throw ConfigError("mdp needs noise.delta");

  const MdpResult res = select_alpha_mdp(op, cfg.penalty, m.data, m.delta,
                                         *cfg.radii, cfg.search, cfg.solver);

  json out{{"config", cfg.raw},
           {"alpha", res.alpha},
           {"delta", m.delta},
           {"window",
            {{"low", cfg.radii->tau_lower * m.delta},
             {"high", cfg.radii->tau_upper * m.delta}}},
           {"bracket_low", res.bracket_low},
           {"bracket_high", res.bracket_high},
           {"evaluations", res.evaluations},
           {"monotonicity_warnings", res.monotonicity_warnings},
           {"solution", solution_json(res.solution)}};

  if (cfg.phantom) {
    const Signal phi_true = make_phantom(*cfg.phantom, cfg.grid_spacing);
    const ConsequenceCheck cc =
        mdp_consequence_check(res, op, phi_true, m.delta, *cfg.radii);
    out["consequences"] = {{"discrepancy", cc.discrepancy},
                           {"upper_slack", cc.upper_slack},
                           {"lower_slack", cc.lower_slack},
                           {"upper_ok", cc.upper_ok},
                           {"lower_ok", cc.lower_ok}};
    if (cfg.psi) {
      const double j_true = eval_penalty(cfg.penalty, phi_true);
      const double sigma = vsc_constants(*cfg.radii).sigma_tilde;
      const AlphaBounds b = compute_alpha_bounds(*cfg.radii, sigma, *cfg.psi,
                                                 j_true, m.delta,
                                                 cfg.alpha_max_variant);
      out["bounds"] = {{"hm_lower", b.hm_lower},
                       {"new_lower", b.new_lower},
                       {"alpha_max", b.alpha_max},
                       {"index_lower_at_delta", b.index_lower_at_delta}};
    }
  }
  write_text(out_path, out.dump(2) + "\n");
  std::printf("selected alpha %.17g with residual %.17g in [%.17g, %.17g]\n",
              res.alpha, res.solution.residual_norm,
              cfg.radii->tau_lower * m.delta, cfg.radii->tau_upper * m.delta);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = load_config_file(config_path);
  const SweepConfig sc = build_sweep_config(cfg);
  const SweepReport report = run_sweep(sc);

  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  write_text((dir / "report.json").string(), report_json(report, cfg.raw));
  write_text((dir / "records.csv").string(), records_csv(report));

  int failed_points = 0;
  for (const auto& r : report.records) {
    if (!r.ok) ++failed_points;
  }
  bool all_flags = true;
  std::printf("%-22s %5s %5s\n", "flag", "pass", "fail");
  for (const auto& [name, tally] : tally_flags(report)) {
    std::printf("%-22s %5d %5d\n", name.c_str(), tally.pass, tally.fail);
    if (tally.fail > 0) all_flags = false;
  }
  std::printf("fitted psi: c=%.17g kappa=%.17g (target %s%s)\n",
              report.fitted_psi.psi.c, report.fitted_psi.psi.kappa,
              fit_target_name(report.fit_target).c_str(),
              report.fitted_psi.clamped ? ", kappa clamped" : "");
  if (failed_points > 0) {
    std::printf("%d of %zu delta points failed; see report.json\n", failed_points,
                report.records.size());
  }
  return all_flags ? 0 : 4;
}

RecordQuantities quantities_from_json(const json& rec) {
  RecordQuantities q;
  q.delta = rec.at("delta").get<double>();
  q.alpha = rec.at("alpha").get<double>();
  q.j_reg = rec.at("j_reg").get<double>();
  q.j_true = rec.at("j_true").get<double>();
  q.bregman_fwd = rec.at("bregman_fwd").get<double>();
  q.bregman_rev = rec.at("bregman_rev").get<double>();
  q.bregman_sym = rec.at("bregman_sym").get<double>();
  q.inner_p_true_diff = rec.at("inner_p_true_diff").get<double>();
  q.discrepancy_true = rec.at("discrepancy_true").get<double>();
  q.total_error = rec.at("total_error").get<double>();
  return q;
}

int cmd_verify(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw ConfigError("cannot read report file: " + report_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("report file " + report_path + " is not valid JSON: " +
                      std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("config") || !doc.contains("records") ||
      !doc.contains("fitted_psi")) {
    throw ConfigError("report file lacks config/records/fitted_psi sections");
  }
  const RunConfig cfg = parse_config(doc["config"]);
  if (!cfg.radii) throw ConfigError("report config echo lacks a radii section");
  const json& fp = doc["fitted_psi"];
  IndexFunction psi;
  psi.c = fp.at("c").get<double>();
  psi.kappa = fp.at("kappa").get<double>();
  if (!(psi.c > 0.0) || !(psi.kappa > 0.0) || psi.kappa > 1.0) {
    throw ConfigError("stored fitted_psi is outside the admissible range");
  }

  static const std::pair<const char*, CheckEntry TheoremChecklist::*> fields[] = {
      {"vsc_condition", &TheoremChecklist::vsc_condition},
      {"vsc_inequality", &TheoremChecklist::vsc_inequality},
      {"vsc_inequality_half", &TheoremChecklist::vsc_inequality_half},
      {"jdiff_psi", &TheoremChecklist::jdiff_psi},
      {"jdiff_delta2", &TheoremChecklist::jdiff_delta2},
      {"bregman_forward", &TheoremChecklist::bregman_forward},
      {"bregman_reverse", &TheoremChecklist::bregman_reverse},
      {"bregman_symmetric", &TheoremChecklist::bregman_symmetric},
      {"reverse_vs_index", &TheoremChecklist::reverse_vs_index},
  };

  int checked = 0;
  int mismatches = 0;
  bool all_flags = true;
  for (const auto& rec : doc["records"]) {
    if (rec.at("status").get<std::string>() != "ok") continue;
    const RecordQuantities q = quantities_from_json(rec);
    const TheoremChecklist fresh = check_theorems(q, *cfg.radii, psi);
    const json& stored = rec.at("checklist");
    for (const auto& [name, field] : fields) {
      const CheckEntry& e = fresh.*field;
      const json& s = stored.at(name);
      const bool stored_ok = s.at("ok").get<bool>();
      const double stored_slack = s.at("slack").get<double>();
      const double tol = 1e-9 * (1.0 + std::fabs(stored_slack));
      if (stored_ok != e.ok || std::fabs(stored_slack - e.slack) > tol) {
        std::fprintf(stderr,
                     "mismatch at delta %.17g, %s: stored ok=%d slack=%.17g, "
                     "recomputed ok=%d slack=%.17g\n",
                     q.delta, name, static_cast<int>(stored_ok), stored_slack,
                     static_cast<int>(e.ok), e.slack);
        ++mismatches;
      }
      if (!e.ok) all_flags = false;
    }
    ++checked;
  }
  if (mismatches > 0) {
    std::fprintf(stderr, "%d checklist entries disagree with the stored report\n",
                 mismatches);
    return 2;
  }
  std::printf("verified %d records: stored checklist reproduced%s\n", checked,
              all_flags ? ", all flags hold" : ", some flags fail");
  return all_flags ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex variational regularization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string out_dir;
  std::string report_path;
  double alpha = 0.0;

  CLI::App* solve =
      app.add_subcommand("solve", "minimize the Tikhonov functional at a fixed alpha");
  solve->add_option("--config", config_path, "JSON config file")->required();
  solve->add_option("--alpha", alpha, "regularization parameter")->required();
  solve->add_option("--out", out_path, "output JSON file")->required();

  CLI::App* mdp =
      app.add_subcommand("mdp", "select alpha by the discrepancy principle");
  mdp->add_option("--config", config_path, "JSON config file")->required();
  mdp->add_option("--out", out_path, "output JSON file")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep", "run a noise sweep; writes report.json and records.csv");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "recompute the inequality checklist of a stored report");
  verify->add_option("--report", report_path, "report.json produced by sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(config_path, alpha, out_path);
    if (mdp->parsed()) return cmd_mdp(config_path, out_path);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
    return cmd_verify(report_path);
  } catch (const NoAdmissibleAlphaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InvalidInputError& e) {
    // covers ConfigError and UnsupportedOperationError
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
