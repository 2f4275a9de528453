#include "varreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <utility>

#include "varreg/errors.hpp"
#include "varreg/rng.hpp"

namespace varreg {

Signal make_phantom(const PhantomSpec& spec, double grid_spacing) {
  if (spec.dimension < 2) throw InvalidInputError("phantom dimension must be at least 2");
  Signal s = make_signal(std::vector<double>(spec.dimension, 0.0), grid_spacing);
  const std::size_t n = spec.dimension;
  switch (spec.name) {
    case PhantomName::step:
      for (std::size_t i = n / 2; i < n; ++i) s.values[i] = 1.0;
      return s;
    case PhantomName::bump:
      for (std::size_t i = n / 4; i < (3 * n) / 4; ++i) s.values[i] = 1.0;
      return s;
    case PhantomName::ramp:
      for (std::size_t i = 0; i < n; ++i) {
        s.values[i] = static_cast<double>(i) / static_cast<double>(n - 1);
      }
      return s;
  }
  throw InvalidInputError("unknown phantom name");
}

Instance make_instance(const LinearMap& op, const Penalty& penalty,
                       const PhantomSpec& spec, double grid_spacing) {
  if (op.in_dim != spec.dimension) {
    throw InvalidInputError("operator input dimension " + std::to_string(op.in_dim) +
                            " does not match phantom dimension " +
                            std::to_string(spec.dimension));
  }
  Instance inst;
  inst.phi_true = make_phantom(spec, grid_spacing);
  inst.f_true = apply(op, inst.phi_true);
  inst.j_true = eval_penalty(penalty, inst.phi_true);
  return inst;
}

Signal add_noise_exact(const Signal& f_true, double delta, std::uint64_t seed) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidInputError("noise level delta must be positive and finite");
  }
  if (f_true.size() == 0) throw InvalidInputError("cannot add noise to an empty signal");
  Rng rng(splitmix64(seed));
  Signal eta;
  eta.grid_spacing = f_true.grid_spacing;
  eta.values.resize(f_true.size());
  double nrm = 0.0;
  do {  // a zero draw is redrawn from the same stream
    for (double& v : eta.values) v = rng.normal();
    nrm = norm(eta);
  } while (nrm == 0.0);
  const double scale = delta / nrm;
  Signal out = f_true;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += scale * eta.values[i];
  return out;
}

namespace {

struct LogFit {
  double slope = 0.0;
  double rms = 0.0;
};

LogFit loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
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
  if (sxx == 0.0) throw InsufficientDataError("rate fit: degenerate regression");
  LogFit f;
  f.slope = sxy / sxx;
  const double icept = ybar - f.slope * xbar;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (icept + f.slope * xs[i]);
    ss += e * e;
  }
  f.rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

double clipped_log(double v) { return std::log(std::max(v, 1e-16)); }

double fit_target_value(const SweepRecord& r, FitTarget t) {
  switch (t) {
    case FitTarget::bregman_fwd: return r.quantities.bregman_fwd;
    case FitTarget::bregman_rev: return r.quantities.bregman_rev;
    case FitTarget::bregman_sym: return r.quantities.bregman_sym;
    case FitTarget::jdiff: return r.quantities.j_reg - r.quantities.j_true;
    case FitTarget::total_error: return r.quantities.total_error;
  }
  throw InvalidInputError("unknown fit target");
}

}  // namespace

std::string fit_target_name(FitTarget t) {
  switch (t) {
    case FitTarget::bregman_fwd: return "bregman_fwd";
    case FitTarget::bregman_rev: return "bregman_rev";
    case FitTarget::bregman_sym: return "bregman_sym";
    case FitTarget::jdiff: return "jdiff";
    case FitTarget::total_error: return "total_error";
  }
  throw InvalidInputError("unknown fit target");
}

RateSummary fit_rates(const std::vector<SweepRecord>& records) {
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records) {
    if (r.ok) ok.push_back(&r);
  }
  if (ok.size() < 3) {
    throw InsufficientDataError("rate fit needs at least 3 surviving records, got " +
                                std::to_string(ok.size()));
  }
  std::vector<double> xs;
  xs.reserve(ok.size());
  for (const auto* r : ok) xs.push_back(std::log(r->delta));

  const auto fit = [&](auto&& value) {
    std::vector<double> ys;
    ys.reserve(ok.size());
    for (const auto* r : ok) ys.push_back(clipped_log(value(*r)));
    const LogFit f = loglog_fit(xs, ys);
    return RateFit{f.slope, f.rms};
  };

  RateSummary s;
  s.bregman_fwd = fit([](const SweepRecord& r) { return r.quantities.bregman_fwd; });
  s.bregman_rev = fit([](const SweepRecord& r) { return r.quantities.bregman_rev; });
  s.bregman_sym = fit([](const SweepRecord& r) { return r.quantities.bregman_sym; });
  s.jdiff = fit([](const SweepRecord& r) { return r.quantities.j_reg - r.quantities.j_true; });
  s.total_error = fit([](const SweepRecord& r) { return r.quantities.total_error; });
  s.discrepancy = fit([](const SweepRecord& r) { return r.quantities.discrepancy_true; });
  return s;
}

SweepReport run_sweep(const SweepConfig& cfg) {
  validate_radii(cfg.radii);
  if (!(cfg.grid.delta_max > 0.0)) throw InvalidInputError("sweep delta_max must be positive");
  if (!(cfg.grid.factor > 0.0) || !(cfg.grid.factor < 1.0)) {
    throw InvalidInputError("sweep factor must lie in (0, 1)");
  }
  if (cfg.grid.count < 3) throw InvalidInputError("sweep count must be at least 3");
  if (!(cfg.noise_fill > 0.0) || cfg.noise_fill > 1.0) {
    throw InvalidInputError("noise_fill must lie in (0, 1]");
  }

  const Instance inst = make_instance(cfg.op, cfg.penalty, cfg.phantom, cfg.grid_spacing);
  const double f_norm = norm(inst.f_true);
  if (!(cfg.grid.delta_max < f_norm)) {
    throw InvalidInputError("sweep delta_max must stay below ||f_true|| = " +
                            std::to_string(f_norm));
  }

  std::vector<double> deltas(cfg.grid.count);
  for (int i = 0; i < cfg.grid.count; ++i) {
    deltas[i] = cfg.grid.delta_max * std::pow(cfg.grid.factor, i);
  }

  // Each grid point owns a noise stream derived from (seed, index), so the
  // points are order-independent and safe to run concurrently.
  const auto run_point = [&](int i) {
    SweepRecord rec;
    rec.delta = deltas[i];
    try {
      const std::uint64_t stream =
          splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1));
      const Signal f_delta =
          add_noise_exact(inst.f_true, cfg.noise_fill * deltas[i], stream);
      const MdpResult m = select_alpha_mdp(cfg.op, cfg.penalty, f_delta, deltas[i],
                                           cfg.radii, cfg.search, cfg.solver);
      rec.ok = true;
      rec.alpha = m.alpha;
      rec.residual_norm = m.solution.residual_norm;
      rec.quantities = record_quantities(cfg.op, cfg.penalty, inst.phi_true,
                                         m.solution.phi, m.alpha, deltas[i]);
      rec.error_le_bregman = rec.quantities.total_error <= rec.quantities.bregman_fwd;
      rec.phi_reg = m.solution.phi.values;
      rec.iterations = m.solution.iterations;
      rec.defect = m.solution.optimality_defect;
      rec.converged = m.solution.converged;
      rec.evaluations = m.evaluations;
      rec.monotonicity_warnings = m.monotonicity_warnings;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.failure_reason = e.what();
    }
    return rec;
  };

  std::vector<std::future<SweepRecord>> tasks;
  tasks.reserve(deltas.size());
  for (int i = 0; i < cfg.grid.count; ++i) {
    tasks.push_back(std::async(std::launch::async, run_point, i));
  }
  SweepReport report;
  report.records.reserve(deltas.size());
  for (auto& t : tasks) report.records.push_back(t.get());

  std::size_t n_ok = 0;
  for (const auto& r : report.records) n_ok += r.ok ? 1 : 0;
  if (n_ok == 0) {
    throw InsufficientDataError("all " + std::to_string(report.records.size()) +
                                " sweep points failed; first reason: " +
                                report.records.front().failure_reason);
  }

  if (cfg.psi_override) {
    report.fitted_psi = IndexFit{*cfg.psi_override, 0.0, false};
  } else {
    std::vector<double> ds, vs;
    for (const auto& r : report.records) {
      if (!r.ok) continue;
      const double v = fit_target_value(r, cfg.fit_target);
      if (v > 0.0 && std::isfinite(v)) {
        ds.push_back(r.delta);
        vs.push_back(v);
      }
    }
    if (ds.size() < 3) {
      throw InsufficientDataError("index fit needs at least 3 positive " +
                                  fit_target_name(cfg.fit_target) + " values, got " +
                                  std::to_string(ds.size()));
    }
    report.fitted_psi = fit_index_power(ds, vs);
  }
  report.fit_target = cfg.fit_target;

  const VscConstants vc = vsc_constants(cfg.radii);
  report.sigma_tilde = vc.sigma_tilde;
  report.j_true = inst.j_true;
  for (auto& rec : report.records) {
    if (!rec.ok) continue;
    rec.bounds = compute_alpha_bounds(cfg.radii, vc.sigma_tilde, report.fitted_psi.psi,
                                      inst.j_true, rec.delta, cfg.alpha_max_variant);
    rec.checklist = check_theorems(rec.quantities, cfg.radii, report.fitted_psi.psi);
  }
  report.rates = fit_rates(report.records);
  return report;
}

namespace {

const std::pair<const char*, CheckEntry TheoremChecklist::*> kFlagFields[] = {
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

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, FlagTally>> tally_flags(const SweepReport& report) {
  std::vector<std::pair<std::string, FlagTally>> out;
  for (const auto& [name, field] : kFlagFields) {
    FlagTally t;
    for (const auto& rec : report.records) {
      if (!rec.ok) continue;
      ((rec.checklist.*field).ok ? t.pass : t.fail) += 1;
    }
    out.emplace_back(name, t);
  }
  return out;
}

std::string records_csv(const SweepReport& report) {
  std::string out =
      "delta,alpha,residual_norm,J_reg,J_true,jdiff,bregman_fwd,bregman_rev,"
      "bregman_sym,total_error,hm_lower,new_lower,alpha_max,vsc_condition,"
      "vsc_inequality,vsc_inequality_half,jdiff_psi,jdiff_delta2,bregman_forward,"
      "bregman_reverse,bregman_symmetric,reverse_vs_index\n";
  for (const auto& r : report.records) {
    if (!r.ok) continue;  // failed points carry no columns; see report.json
    const auto& q = r.quantities;
    out += num(r.delta) + "," + num(r.alpha) + "," + num(r.residual_norm) + "," +
           num(q.j_reg) + "," + num(q.j_true) + "," + num(q.j_reg - q.j_true) + "," +
           num(q.bregman_fwd) + "," + num(q.bregman_rev) + "," + num(q.bregman_sym) +
           "," + num(q.total_error) + "," + num(r.bounds.hm_lower) + "," +
           num(r.bounds.new_lower) + "," + num(r.bounds.alpha_max);
    for (const auto& [name, field] : kFlagFields) {
      (void)name;
      out += (r.checklist.*field).ok ? ",1" : ",0";
    }
    out += "\n";
  }
  return out;
}

std::string report_json(const SweepReport& report, const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["config"] = config_echo;
  j["fitted_psi"] = {{"c", report.fitted_psi.psi.c},
                     {"kappa", report.fitted_psi.psi.kappa},
                     {"fit_residual", report.fitted_psi.fit_residual},
                     {"clamped", report.fitted_psi.clamped},
                     {"target", fit_target_name(report.fit_target)}};
  j["sigma_tilde"] = report.sigma_tilde;
  j["j_true"] = report.j_true;

  const auto rate = [](const RateFit& f) {
    return nlohmann::json{{"slope", f.slope}, {"residual", f.residual}};
  };
  j["rate_summary"] = {{"bregman_fwd", rate(report.rates.bregman_fwd)},
                       {"bregman_rev", rate(report.rates.bregman_rev)},
                       {"bregman_sym", rate(report.rates.bregman_sym)},
                       {"jdiff", rate(report.rates.jdiff)},
                       {"total_error", rate(report.rates.total_error)},
                       {"discrepancy", rate(report.rates.discrepancy)}};

  nlohmann::json tallies = nlohmann::json::object();
  for (const auto& [name, t] : tally_flags(report)) {
    tallies[name] = {{"pass", t.pass}, {"fail", t.fail}};
  }
  j["tallies"] = tallies;

  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    if (!r.ok) {
      records.push_back({{"delta", r.delta}, {"status", "failed"}, {"reason", r.failure_reason}});
      continue;
    }
    const auto& q = r.quantities;
    const auto entry = [](const CheckEntry& e) {
      return nlohmann::json{{"ok", e.ok}, {"slack", e.slack}};
    };
    nlohmann::json rec{
        {"delta", r.delta},
        {"status", "ok"},
        {"alpha", r.alpha},
        {"residual_norm", r.residual_norm},
        {"discrepancy_true", q.discrepancy_true},
        {"j_reg", q.j_reg},
        {"j_true", q.j_true},
        {"jdiff", q.j_reg - q.j_true},
        {"bregman_fwd", q.bregman_fwd},
        {"bregman_rev", q.bregman_rev},
        {"bregman_sym", q.bregman_sym},
        {"inner_p_true_diff", q.inner_p_true_diff},
        {"total_error", q.total_error},
        {"error_le_bregman", r.error_le_bregman},
        {"bounds",
         {{"hm_lower", r.bounds.hm_lower},
          {"new_lower", r.bounds.new_lower},
          {"alpha_max", r.bounds.alpha_max},
          {"index_lower_at_delta", r.bounds.index_lower_at_delta}}},
        {"checklist",
         {{"vsc_condition", entry(r.checklist.vsc_condition)},
          {"vsc_inequality", entry(r.checklist.vsc_inequality)},
          {"vsc_inequality_half", entry(r.checklist.vsc_inequality_half)},
          {"jdiff_psi", entry(r.checklist.jdiff_psi)},
          {"jdiff_delta2", entry(r.checklist.jdiff_delta2)},
          {"bregman_forward", entry(r.checklist.bregman_forward)},
          {"bregman_reverse", entry(r.checklist.bregman_reverse)},
          {"bregman_symmetric", entry(r.checklist.bregman_symmetric)},
          {"reverse_vs_index", entry(r.checklist.reverse_vs_index)}}},
        {"solver",
         {{"iterations", r.iterations}, {"defect", r.defect}, {"converged", r.converged}}},
        {"search",
         {{"evaluations", r.evaluations},
          {"monotonicity_warnings", r.monotonicity_warnings}}},
        {"phi_reg", r.phi_reg}};
    records.push_back(std::move(rec));
  }
  j["records"] = records;
  return j.dump(2) + "\n";
}

}  // namespace varreg
