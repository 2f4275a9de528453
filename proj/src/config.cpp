#include "varreg/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "varreg/errors.hpp"

namespace varreg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key: " + join(path, it.key()));
  }
}

const json& member(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing required key '") + key + "'");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> num_array(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double positive(const json& j, const std::string& path) {
  const double v = num(j, path);
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive and finite");
  return v;
}

json parse_operator(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = str(member(j, path, "kind"), join(path, "kind"));
  if (kind == "dense") {
    reject_unknown(j, path, {"kind", "matrix"});
    const json& m = member(j, path, "matrix");
    const std::string mpath = join(path, "matrix");
    if (!m.is_array() || m.empty()) fail(mpath, "expected a non-empty array of rows");
    std::size_t cols = 0;
    for (std::size_t r = 0; r < m.size(); ++r) {
      const auto row = num_array(m[r], mpath + "[" + std::to_string(r) + "]");
      if (r == 0) cols = row.size();
      else if (row.size() != cols) fail(mpath, "rows differ in length");
    }
  } else if (kind == "convolution") {
    reject_unknown(j, path, {"kind", "kernel"});
    num_array(member(j, path, "kernel"), join(path, "kernel"));
  } else {
    fail(join(path, "kind"), "expected \"dense\" or \"convolution\"");
  }
  return j;
}

Penalty parse_penalty(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = str(member(j, path, "kind"), join(path, "kind"));
  if (kind == "quadratic") {
    reject_unknown(j, path, {"kind"});
    return make_quadratic();
  }
  if (kind == "l1") {
    reject_unknown(j, path, {"kind"});
    return make_l1();
  }
  if (kind == "smoothed_tv") {
    reject_unknown(j, path, {"kind", "beta"});
    return make_smoothed_tv(positive(member(j, path, "beta"), join(path, "beta")));
  }
  fail(join(path, "kind"), "expected \"quadratic\", \"smoothed_tv\" or \"l1\"");
}

PhantomSpec parse_phantom(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, path, {"name", "dimension"});
  const std::string name = str(member(j, path, "name"), join(path, "name"));
  PhantomSpec spec;
  if (name == "step") spec.name = PhantomName::step;
  else if (name == "bump") spec.name = PhantomName::bump;
  else if (name == "ramp") spec.name = PhantomName::ramp;
  else fail(join(path, "name"), "expected \"step\", \"bump\" or \"ramp\"");
  const long long dim = integer(member(j, path, "dimension"), join(path, "dimension"));
  if (dim < 2) fail(join(path, "dimension"), "must be at least 2");
  spec.dimension = static_cast<std::size_t>(dim);
  return spec;
}

IndexFunction parse_psi(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, path, {"c", "kappa"});
  const double c = positive(member(j, path, "c"), join(path, "c"));
  const double kappa = num(member(j, path, "kappa"), join(path, "kappa"));
  if (!(kappa > 0.0) || kappa > 1.0) fail(join(path, "kappa"), "must lie in (0, 1]");
  return IndexFunction{c, kappa};
}

FitTarget parse_fit_target(const json& j, const std::string& path) {
  const std::string s = str(j, path);
  if (s == "bregman_fwd") return FitTarget::bregman_fwd;
  if (s == "bregman_rev") return FitTarget::bregman_rev;
  if (s == "bregman_sym") return FitTarget::bregman_sym;
  if (s == "jdiff") return FitTarget::jdiff;
  if (s == "total_error") return FitTarget::total_error;
  fail(path, "expected one of bregman_fwd, bregman_rev, bregman_sym, jdiff, total_error");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(doc, "",
                 {"operator", "penalty", "phantom", "data", "grid_spacing", "noise",
                  "radii", "solver", "search", "sweep", "psi", "alpha_max_variant"});

  RunConfig cfg;
  cfg.raw = doc;
  cfg.op_spec = parse_operator(member(doc, "", "operator"), "operator");
  cfg.penalty = parse_penalty(member(doc, "", "penalty"), "penalty");

  if (const auto it = doc.find("phantom"); it != doc.end()) {
    cfg.phantom = parse_phantom(*it, "phantom");
  }
  if (const auto it = doc.find("data"); it != doc.end()) {
    if (!it->is_object()) fail("data", "expected an object");
    reject_unknown(*it, "data", {"values"});
    cfg.data = num_array(member(*it, "data", "values"), "data.values");
  }
  if (const auto it = doc.find("grid_spacing"); it != doc.end()) {
    cfg.grid_spacing = positive(*it, "grid_spacing");
  }
  if (const auto it = doc.find("noise"); it != doc.end()) {
    if (!it->is_object()) fail("noise", "expected an object");
    reject_unknown(*it, "noise", {"delta", "seed", "noise_fill"});
    if (const auto d = it->find("delta"); d != it->end()) {
      cfg.noise_delta = positive(*d, "noise.delta");
    }
    if (const auto s = it->find("seed"); s != it->end()) {
      const long long v = integer(*s, "noise.seed");
      if (v < 0) fail("noise.seed", "must be non-negative");
      cfg.noise_seed = static_cast<std::uint64_t>(v);
    }
    if (const auto f = it->find("noise_fill"); f != it->end()) {
      cfg.noise_fill = num(*f, "noise.noise_fill");
      if (!(cfg.noise_fill > 0.0) || cfg.noise_fill > 1.0) {
        fail("noise.noise_fill", "must lie in (0, 1]");
      }
    }
  }
  if (const auto it = doc.find("radii"); it != doc.end()) {
    if (!it->is_object()) fail("radii", "expected an object");
    reject_unknown(*it, "radii", {"tau_lower", "tau_upper"});
    DiscrepancyRadii r;
    r.tau_lower = num(member(*it, "radii", "tau_lower"), "radii.tau_lower");
    r.tau_upper = num(member(*it, "radii", "tau_upper"), "radii.tau_upper");
    try {
      validate_radii(r);
    } catch (const InvalidInputError& e) {
      fail("radii", e.what());
    }
    cfg.radii = r;
  }
  if (const auto it = doc.find("solver"); it != doc.end()) {
    if (!it->is_object()) fail("solver", "expected an object");
    reject_unknown(*it, "solver", {"tol", "max_iter"});
    if (const auto t = it->find("tol"); t != it->end()) {
      cfg.solver.tol = positive(*t, "solver.tol");
    }
    if (const auto m = it->find("max_iter"); m != it->end()) {
      const long long v = integer(*m, "solver.max_iter");
      if (v < 1) fail("solver.max_iter", "must be at least 1");
      cfg.solver.max_iter = static_cast<int>(v);
    }
  }
  if (const auto it = doc.find("search"); it != doc.end()) {
    if (!it->is_object()) fail("search", "expected an object");
    reject_unknown(*it, "search", {"alpha0", "expansion", "bracket_tol", "max_probes"});
    if (const auto a = it->find("alpha0"); a != it->end() && !a->is_null()) {
      cfg.search.alpha0 = positive(*a, "search.alpha0");
    }
    if (const auto e = it->find("expansion"); e != it->end()) {
      cfg.search.expansion = num(*e, "search.expansion");
      if (!(cfg.search.expansion > 1.0)) fail("search.expansion", "must exceed 1");
    }
    if (const auto b = it->find("bracket_tol"); b != it->end()) {
      cfg.search.bracket_tol = positive(*b, "search.bracket_tol");
    }
    if (const auto m = it->find("max_probes"); m != it->end()) {
      const long long v = integer(*m, "search.max_probes");
      if (v < 1) fail("search.max_probes", "must be at least 1");
      cfg.search.max_probes = static_cast<int>(v);
    }
  }
  if (const auto it = doc.find("sweep"); it != doc.end()) {
    if (!it->is_object()) fail("sweep", "expected an object");
    reject_unknown(*it, "sweep",
                   {"delta_max", "factor", "count", "fit_target", "psi_override"});
    DeltaGrid g;
    g.delta_max = positive(member(*it, "sweep", "delta_max"), "sweep.delta_max");
    g.factor = num(member(*it, "sweep", "factor"), "sweep.factor");
    if (!(g.factor > 0.0) || !(g.factor < 1.0)) fail("sweep.factor", "must lie in (0, 1)");
    const long long c = integer(member(*it, "sweep", "count"), "sweep.count");
    if (c < 3) fail("sweep.count", "must be at least 3");
    g.count = static_cast<int>(c);
    cfg.sweep_grid = g;
    if (const auto f = it->find("fit_target"); f != it->end()) {
      cfg.fit_target = parse_fit_target(*f, "sweep.fit_target");
    }
    if (const auto p = it->find("psi_override"); p != it->end()) {
      cfg.psi_override = parse_psi(*p, "sweep.psi_override");
    }
  }
  if (const auto it = doc.find("psi"); it != doc.end()) {
    cfg.psi = parse_psi(*it, "psi");
  }
  if (const auto it = doc.find("alpha_max_variant"); it != doc.end()) {
    const std::string s = str(*it, "alpha_max_variant");
    if (s == "printed") cfg.alpha_max_variant = AlphaMaxVariant::printed;
    else if (s == "corrected") cfg.alpha_max_variant = AlphaMaxVariant::corrected;
    else fail("alpha_max_variant", "expected \"printed\" or \"corrected\"");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

LinearMap build_operator(const RunConfig& cfg, std::size_t n) {
  const std::string kind = cfg.op_spec.at("kind").get<std::string>();
  if (kind == "dense") {
    const auto& m = cfg.op_spec.at("matrix");
    Eigen::MatrixXd mat(m.size(), m[0].size());
    for (std::size_t r = 0; r < m.size(); ++r) {
      for (std::size_t c = 0; c < m[r].size(); ++c) mat(r, c) = m[r][c].get<double>();
    }
    return make_dense(mat);
  }
  std::vector<double> kernel = cfg.op_spec.at("kernel").get<std::vector<double>>();
  if (n == 0) throw ConfigError("convolution operator needs a phantom or data to fix the signal length");
  return make_convolution(std::move(kernel), n);
}

Measurement build_measurement(const RunConfig& cfg, const LinearMap& op) {
  Measurement m;
  if (cfg.data) {
    if (cfg.data->size() != op.out_dim) {
      throw ConfigError("data.values length " + std::to_string(cfg.data->size()) +
                        " does not match operator output dimension " +
                        std::to_string(op.out_dim));
    }
    m.data = make_signal(*cfg.data, cfg.grid_spacing);
    m.delta = cfg.noise_delta.value_or(0.0);
    return m;
  }
  if (!cfg.phantom || !cfg.noise_delta) {
    throw ConfigError("config needs either data.values or phantom plus noise.delta");
  }
  const Signal phi = make_phantom(*cfg.phantom, cfg.grid_spacing);
  const Signal f_true = apply(op, phi);
  m.delta = *cfg.noise_delta;
  m.data = add_noise_exact(f_true, cfg.noise_fill * m.delta, cfg.noise_seed);
  return m;
}

SweepConfig build_sweep_config(const RunConfig& cfg) {
  if (!cfg.phantom) throw ConfigError("sweep needs a phantom section");
  if (!cfg.radii) throw ConfigError("sweep needs a radii section");
  if (!cfg.sweep_grid) throw ConfigError("sweep needs a sweep section");
  SweepConfig sc;
  sc.op = build_operator(cfg, cfg.phantom->dimension);
  sc.penalty = cfg.penalty;
  sc.phantom = *cfg.phantom;
  sc.grid_spacing = cfg.grid_spacing;
  sc.radii = *cfg.radii;
  sc.grid = *cfg.sweep_grid;
  sc.seed = cfg.noise_seed;
  sc.noise_fill = cfg.noise_fill;
  sc.fit_target = cfg.fit_target;
  sc.psi_override = cfg.psi_override;
  sc.alpha_max_variant = cfg.alpha_max_variant;
  sc.solver = cfg.solver;
  sc.search = cfg.search;
  return sc;
}

}  // namespace varreg
