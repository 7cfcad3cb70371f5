#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <cmath>

#include "gqmech/errors.hpp"
#include "gqmech/expr.hpp"
#include "gqmech/numeric.hpp"
#include "gqmech/scenario.hpp"

using namespace gqm;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gqmech_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_with_config(const ordered_json& config, const std::string& tag) {
  auto dir = temp_dir(tag);
  auto cfg_path = dir / "config.json";
  std::ofstream os(cfg_path);
  os << config.dump(2);
  os.close();
  RunOptions opts;
  opts.config_path = cfg_path.string();
  opts.output_dir = (dir / "out").string();
  return run_scenario(opts);
}

}  // namespace

TEST_CASE("expression parsing") {
  std::vector<std::string> names = {"x", "y"};
  Expression e = Expression::parse("sin(x)*y^2 + exp(-x/2)", names);
  Vec at = {0.4, -1.5};
  CHECK(e.eval(at) ==
        doctest::Approx(std::sin(0.4) * 2.25 + std::exp(-0.2)).epsilon(1e-14));
  Expression dx = e.derivative(0);
  CHECK(dx.eval(at) ==
        doctest::Approx(std::cos(0.4) * 2.25 - 0.5 * std::exp(-0.2)).epsilon(1e-12));
  Expression dy = e.derivative(1);
  CHECK(dy.eval(at) == doctest::Approx(std::sin(0.4) * 2.0 * -1.5).epsilon(1e-12));

  CHECK_THROWS_AS(Expression::parse("foo(x)", names), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x + z", names), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x + ", names), ConfigError);
  CHECK(Expression::parse("2*pi", names).eval(at) == doctest::Approx(6.2831853).epsilon(1e-7));
}

TEST_CASE("default configurations validate") {
  for (const char* name :
       {"classical-free", "classical-charged", "classical-curved", "classical-nonrel",
        "kinematics-suite", "quantize-verify", "schrodinger-run", "klein-gordon-run",
        "full-verify"}) {
    ordered_json cfg = default_config(name);
    CHECK_NOTHROW(validate_config(cfg));
  }
  CHECK_THROWS_AS(default_config("no-such-scenario"), ConfigError);
}

TEST_CASE("unknown keys are rejected with a field path") {
  ordered_json cfg = default_config("classical-free");
  cfg["surprise"] = 1;
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "config.surprise");
  }
}

TEST_CASE("missing mass yields a config error with the field name") {
  ordered_json cfg = default_config("classical-free");
  cfg["system"].erase("mass");
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "system.mass");
  }
  CHECK(run_with_config(cfg, "missing_mass") == 2);
}

TEST_CASE("malformed config file exits with code 2") {
  auto dir = temp_dir("malformed");
  auto cfg_path = dir / "config.json";
  std::ofstream os(cfg_path);
  os << "{ not json";
  os.close();
  RunOptions opts;
  opts.config_path = cfg_path.string();
  opts.output_dir = (dir / "out").string();
  CHECK(run_scenario(opts) == 2);

  RunOptions missing;
  missing.config_path = (dir / "nope.json").string();
  CHECK(run_scenario(missing) == 2);

  RunOptions neither;
  CHECK(run_scenario(neither) == 2);
}

TEST_CASE("klein-gordon run with CFL 2.0 fails with exit code 1") {
  ordered_json cfg = default_config("klein-gordon-run");
  cfg["evolution"]["cfl"] = 2.0;
  cfg["evolution"]["steps"] = 50;
  auto dir = temp_dir("kg_cfl");
  auto cfg_path = dir / "config.json";
  std::ofstream os(cfg_path);
  os << cfg.dump(2);
  os.close();
  RunOptions opts;
  opts.config_path = cfg_path.string();
  opts.output_dir = (dir / "out").string();
  CHECK(run_scenario(opts) == 1);
  // The report records the guard.
  std::string report = slurp(dir / "out" / "report.json");
  CHECK(report.find("cfl-admissible") != std::string::npos);
  CHECK(report.find("\"all_pass\": false") != std::string::npos);
}

TEST_CASE("scenario runs are deterministic byte for byte") {
  ordered_json cfg = default_config("schrodinger-run");
  cfg["evolution"]["steps"] = 60;
  cfg["evolution"]["record_every"] = 20;
  cfg["grid"]["n"] = 128;

  auto dir_a = temp_dir("det_a");
  auto dir_b = temp_dir("det_b");
  execute_config(cfg, dir_a.string());
  execute_config(cfg, dir_b.string());
  for (const char* file : {"report.json", "series.csv", "final_state.gqgrid"}) {
    CHECK(slurp(dir_a / file) == slurp(dir_b / file));
    CHECK(!slurp(dir_a / file).empty());
  }
}

TEST_CASE("classical runs write trajectory artifacts with the seed recorded") {
  ordered_json cfg = default_config("classical-free");
  cfg["integrator"]["duration"] = 0.2;
  cfg["seed"] = 424242;
  auto dir = temp_dir("free_artifacts");
  VerificationReport rep = execute_config(cfg, dir.string());
  CHECK(rep.all_pass());
  std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.rfind("# scenario=classical-free seed=424242", 0) == 0);
  CHECK(slurp(dir / "report.json").find("\"seed\": 424242") != std::string::npos);
  CHECK(!slurp(dir / "trajectory.json").empty());
}

TEST_CASE("scenario listing") {
  std::string text = list_scenarios_text();
  for (const char* name :
       {"classical-free", "classical-charged", "classical-curved", "classical-nonrel",
        "kinematics-suite", "quantize-verify", "schrodinger-run", "klein-gordon-run",
        "full-verify"}) {
    CHECK(text.find(name) != std::string::npos);
  }
  ordered_json listing = ordered_json::parse(list_scenarios_json());
  CHECK(listing.size() == 9);
  CHECK(listing[0].contains("anchors"));
}

TEST_CASE("seed override is applied") {
  ordered_json cfg = default_config("kinematics-suite");
  auto dir = temp_dir("seed_override");
  auto cfg_path = dir / "config.json";
  std::ofstream os(cfg_path);
  os << cfg.dump(2);
  os.close();
  RunOptions opts;
  opts.config_path = cfg_path.string();
  opts.output_dir = (dir / "out").string();
  opts.seed_override = 777;
  CHECK(run_scenario(opts) == 0);
  CHECK(slurp(dir / "out" / "report.json").find("\"seed\": 777") != std::string::npos);
}
