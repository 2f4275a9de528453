// End-to-end tests driving the installed binary through a shell, covering
// the exit-code contract: 0 ok, 1 config error, 2 computation failure,
// 3 no admissible alpha, 4 failed verification flags.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "varreg/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  static const std::string exe = [] {
    const char* env = std::getenv("VARREG_CLI_PATH");
    return std::string(env != nullptr ? env : VARREG_CLI_PATH);
  }();
  const int rc = std::system((exe + " " + args).c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

fs::path fresh_dir() {
  static int counter = 0;
  const fs::path p = fs::temp_directory_path() /
                     ("varreg_cli_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& doc) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json identity_solve_config() {
  return json::parse(R"({
    "operator": {"kind": "dense", "matrix": [[1, 0], [0, 1]]},
    "penalty": {"kind": "quadratic"},
    "data": {"values": [1.0, 0.0]}
  })");
}

json mdp_identity_config() {
  json doc = identity_solve_config();
  doc["noise"] = {{"delta", 0.1}};
  doc["radii"] = {{"tau_lower", 1.5}, {"tau_upper", 2.0}};
  return doc;
}

json sweep_config(double psi_c) {
  return json{{"operator", {{"kind", "convolution"}, {"kernel", {1.0}}}},
              {"penalty", {{"kind", "quadratic"}}},
              {"phantom", {{"name", "step"}, {"dimension", 16}}},
              {"radii", {{"tau_lower", 1.5}, {"tau_upper", 2.0}}},
              {"noise", {{"seed", 7}}},
              {"sweep",
               {{"delta_max", 0.1},
                {"factor", 0.5},
                {"count", 5},
                {"psi_override", {{"c", psi_c}, {"kappa", 1.0}}}}}};
}

}  // namespace

TEST_CASE("solve writes the regularized minimizer") {
  const fs::path dir = fresh_dir();
  const json doc = identity_solve_config();
  const fs::path cfg = write_json(dir, "cfg.json", doc);
  const fs::path out = dir / "solution.json";

  const int rc = run_cli("solve --config " + cfg.string() + " --alpha 1.0 --out " +
                         out.string() + " > " + (dir / "stdout.txt").string());
  CHECK(rc == 0);

  const json sol = json::parse(slurp(out));
  REQUIRE(sol["phi"].size() == 2);
  CHECK(sol["phi"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol["phi"][1].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol["alpha"].get<double>() == 1.0);
  CHECK(sol["converged"].get<bool>());
  CHECK(sol["config"] == doc);
  fs::remove_all(dir);
}

TEST_CASE("solve rejects a non-positive alpha") {
  const fs::path dir = fresh_dir();
  const fs::path cfg = write_json(dir, "cfg.json", identity_solve_config());
  const fs::path err = dir / "stderr.txt";

  const int rc = run_cli("solve --config " + cfg.string() + " --alpha 0 --out " +
                         (dir / "o.json").string() + " 2> " + err.string());
  CHECK(rc == 1);
  CHECK(slurp(err).find("alpha must be positive") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("config problems exit with code 1") {
  const fs::path dir = fresh_dir();

  SUBCASE("missing config file") {
    const int rc = run_cli("solve --config " + (dir / "absent.json").string() +
                           " --alpha 1 --out " + (dir / "o.json").string() +
                           " 2> /dev/null");
    CHECK(rc == 1);
  }
  SUBCASE("unknown key") {
    json doc = identity_solve_config();
    doc["operator_kind"] = "dense";
    const fs::path cfg = write_json(dir, "cfg.json", doc);
    const int rc = run_cli("solve --config " + cfg.string() + " --alpha 1 --out " +
                           (dir / "o.json").string() + " 2> /dev/null");
    CHECK(rc == 1);
  }
  SUBCASE("missing required command option") {
    const int rc = run_cli("solve --config x.json 2> /dev/null > /dev/null");
    CHECK(rc == 1);
  }
  SUBCASE("help is not an error") {
    const int rc = run_cli("--help > /dev/null");
    CHECK(rc == 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("mdp lands inside the discrepancy window") {
  const fs::path dir = fresh_dir();
  const json doc = mdp_identity_config();
  const fs::path cfg = write_json(dir, "cfg.json", doc);
  const fs::path out = dir / "mdp.json";

  const int rc = run_cli("mdp --config " + cfg.string() + " --out " + out.string() +
                         " > /dev/null");
  CHECK(rc == 0);

  const json res = json::parse(slurp(out));
  const double alpha = res["alpha"].get<double>();
  CHECK(alpha >= 3.0 / 17.0 - 1e-9);
  CHECK(alpha <= 0.25 + 1e-9);
  const double residual = res["solution"]["residual_norm"].get<double>();
  CHECK(residual >= 0.15 - 1e-9);
  CHECK(residual <= 0.20 + 1e-9);
  CHECK(res["window"]["low"].get<double>() == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(res["window"]["high"].get<double>() == doctest::Approx(0.20).epsilon(1e-15));

  // the echoed config is itself a valid config document
  CHECK_NOTHROW(varreg::parse_config(res["config"]));
  CHECK(res["config"] == doc);
  fs::remove_all(dir);
}

TEST_CASE("mdp with noise beyond the data norm exits 3") {
  const fs::path dir = fresh_dir();
  json doc = mdp_identity_config();
  doc["noise"]["delta"] = 1.5;  // ||f|| = 1, no alpha can reach the window
  const fs::path cfg = write_json(dir, "cfg.json", doc);

  const int rc = run_cli("mdp --config " + cfg.string() + " --out " +
                         (dir / "o.json").string() + " 2> /dev/null");
  CHECK(rc == 3);
  fs::remove_all(dir);
}

TEST_CASE("sweep succeeds with a generous index override") {
  const fs::path dir = fresh_dir();
  const fs::path cfg = write_json(dir, "cfg.json", sweep_config(10.0));
  const fs::path out1 = dir / "run1";
  const fs::path stdout1 = dir / "stdout1.txt";

  const int rc = run_cli("sweep --config " + cfg.string() + " --out-dir " +
                         out1.string() + " > " + stdout1.string());
  CHECK(rc == 0);

  const std::string console = slurp(stdout1);
  CHECK(console.find("fitted psi: c=10 kappa=1") != std::string::npos);

  const std::string csv = slurp(out1 / "records.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 records

  const json report = json::parse(slurp(out1 / "report.json"));
  CHECK(report["records"].size() == 5);
  for (const auto& [name, tally] : report["tallies"].items()) {
    (void)name;
    CHECK(tally["fail"].get<int>() == 0);
  }

  SUBCASE("two runs produce identical bytes") {
    const fs::path out2 = dir / "run2";
    const int rc2 = run_cli("sweep --config " + cfg.string() + " --out-dir " +
                            out2.string() + " > /dev/null");
    CHECK(rc2 == 0);
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out1 / "records.csv") == slurp(out2 / "records.csv"));
  }

  SUBCASE("verify reproduces a clean report") {
    const fs::path vout = dir / "verify_stdout.txt";
    const int vrc = run_cli("verify --report " + (out1 / "report.json").string() +
                            " > " + vout.string());
    CHECK(vrc == 0);
    CHECK(slurp(vout).find("verified 5 records") != std::string::npos);
  }

  SUBCASE("a tampered slack is detected") {
    json doc = json::parse(slurp(out1 / "report.json"));
    doc["records"][0]["checklist"]["reverse_vs_index"]["slack"] =
        doc["records"][0]["checklist"]["reverse_vs_index"]["slack"].get<double>() + 1.0;
    const fs::path tampered = write_json(dir, "tampered.json", doc);
    const int vrc = run_cli("verify --report " + tampered.string() + " 2> /dev/null");
    CHECK(vrc == 2);
  }

  fs::remove_all(dir);
}

TEST_CASE("sweep reports failing flags with exit 4") {
  const fs::path dir = fresh_dir();
  const fs::path cfg = write_json(dir, "cfg.json", sweep_config(1e-8));
  const fs::path out = dir / "run";

  const int rc = run_cli("sweep --config " + cfg.string() + " --out-dir " +
                         out.string() + " > /dev/null");
  CHECK(rc == 4);

  SUBCASE("verify agrees that flags fail") {
    const int vrc = run_cli("verify --report " + (out / "report.json").string() +
                            " > /dev/null");
    CHECK(vrc == 4);
  }
  fs::remove_all(dir);
}

TEST_CASE("sweep without its config sections exits 1") {
  const fs::path dir = fresh_dir();
  json doc = sweep_config(10.0);
  doc.erase("sweep");
  const fs::path cfg = write_json(dir, "cfg.json", doc);
  const int rc = run_cli("sweep --config " + cfg.string() + " --out-dir " +
                         (dir / "run").string() + " 2> /dev/null");
  CHECK(rc == 1);
  fs::remove_all(dir);
}

TEST_CASE("sweep where every point fails exits 2") {
  const fs::path dir = fresh_dir();
  json doc = sweep_config(10.0);
  // one probe stuck at a huge alpha: the residual never enters the window
  doc["search"] = {{"alpha0", 1e6}, {"max_probes", 1}};
  const fs::path cfg = write_json(dir, "cfg.json", doc);
  const int rc = run_cli("sweep --config " + cfg.string() + " --out-dir " +
                         (dir / "run").string() + " 2> /dev/null");
  CHECK(rc == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify rejects unusable reports") {
  const fs::path dir = fresh_dir();

  SUBCASE("missing file") {
    const int rc = run_cli("verify --report " + (dir / "absent.json").string() +
                           " 2> /dev/null");
    CHECK(rc == 1);
  }
  SUBCASE("not a report") {
    const fs::path p = write_json(dir, "odd.json", json{{"foo", 1}});
    const int rc = run_cli("verify --report " + p.string() + " 2> /dev/null");
    CHECK(rc == 1);
  }
  fs::remove_all(dir);
}
