#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "duffing/error.hpp"
#include "duffing/harness.hpp"

using namespace duffing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("duffing_harness_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base_config(const std::string& experiment) {
  return {{"experiment", experiment},
          {"system",
           {{"n", 1},
            {"g", {{"kind", "arctan"}}},
            {"p", {{"kind", "trig_poly"}, {"period", 2.0 * std::numbers::pi}, {"cos", {4.0}}, {"sin", json::array()}}}}}};
}

// Runs the CLI and returns its exit status.
int lab(const std::string& args, const fs::path& capture) {
  const std::string cmd = std::string(DUFFING_LAB_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e23) == "9.9999999999999992e+22");
  CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
}

TEST_CASE("CSV tables follow RFC 4180") {
  CsvTable t({"a", "b", "c"});
  t.row().add(1.5).add(std::size_t{7}).add(std::string("plain"));
  t.row().add(0.1).add(std::size_t{0}).add(std::string("has,comma \"quoted\""));
  CHECK(t.str() == "a,b,c\r\n1.5,7,plain\r\n0.10000000000000001,0,\"has,comma \"\"quoted\"\"\"\r\n");
  CHECK(CsvTable({"only"}).str() == "only\r\n");
}

TEST_CASE("atomic writes replace the file and leave no temporary") {
  const fs::path dir = scratch("atomic");
  const fs::path file = dir / "nested" / "f.txt";
  write_file_atomic(file, "first");
  write_file_atomic(file, "second");
  CHECK(slurp(file) == "second");
  CHECK_FALSE(fs::exists(dir / "nested" / "f.txt.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("experiment names") {
  CHECK(experiment_from_string("escape-scan") == Experiment::EscapeScan);
  CHECK(experiment_from_string("escape_scan") == Experiment::EscapeScan);
  CHECK(experiment_from_string("normalform_check") == Experiment::NormalformCheck);
  CHECK(experiment_from_string(to_string(Experiment::Poincare)) == Experiment::Poincare);
  CHECK_THROWS_AS(experiment_from_string("teleport"), Error);
}

TEST_CASE("config round trip") {
  json j = base_config("classify");
  j["system"]["psi"] = {{"kind", "trig_poly"}, {"period", 3.0}, {"cos", json::array()}, {"sin", {1.0}}};
  j["numeric"] = {{"tol", 1e-11}, {"N", 77}, {"grids", {{"I", {1.0, 2.0}}}}, {"options", {{"I0", 25.0}}},
                  {"flags", {{"d_fit", true}}}};
  j["output"] = {{"dir", "some/where"}, {"formats", {"json"}}};
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.experiment == Experiment::Classify);
  CHECK(c.numeric.tol == 1e-11);
  CHECK(c.numeric.N == 77);
  CHECK(c.numeric.option("I0", 0.0) == 25.0);
  CHECK(c.numeric.option("missing", 3.0) == 3.0);
  CHECK(c.numeric.flag("d_fit"));
  CHECK_FALSE(c.numeric.flag("other"));
  CHECK(c.output.wants(Format::Json));
  CHECK_FALSE(c.output.wants(Format::Csv));
  const json again = to_json(config_from_json(to_json(c)));
  CHECK(again == to_json(c));
}

TEST_CASE("config validation") {
  auto rejects = [](const json& j) {
    try {
      (void)config_from_json(j);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Validation;
    }
    return false;
  };
  json j = base_config("conditions");
  CHECK_FALSE(rejects(j));

  json extra = j;
  extra["colour"] = "blue";
  CHECK(rejects(extra));
  extra = j;
  extra["system"]["q"] = 1;
  CHECK(rejects(extra));
  extra = j;
  extra["numeric"] = {{"tolerance", 1e-9}};
  CHECK(rejects(extra));

  json bad = j;
  bad["numeric"] = {{"tol", 1e-3}};
  CHECK(rejects(bad));
  bad = j;
  bad["numeric"] = {{"N", 0}};
  CHECK(rejects(bad));
  bad = j;
  bad["system"]["n"] = 0;
  CHECK(rejects(bad));
  bad = j;
  bad["system"]["g"] = {{"kind", "trig_poly"}, {"cos", {1.0}}, {"sin", json::array()}};  // no limit at infinity
  CHECK(rejects(bad));
  bad = j;
  bad["experiment"] = "nope";
  CHECK(rejects(bad));
  bad = j;
  bad["output"] = {{"formats", {"xml"}}};
  CHECK(rejects(bad));
  bad = j;
  bad["numeric"] = {{"options", {{"I0", "big"}}}};
  CHECK(rejects(bad));
  bad = j;
  bad.erase("system");
  CHECK(rejects(bad));
}

TEST_CASE("run writes config, reports and exit codes") {
  const fs::path dir = scratch("run");
  json j = base_config("conditions");
  j["output"] = {{"dir", (dir / "ok").string()}};
  RunResult r = run(config_from_json(j));
  CHECK(r.exit_code == kExitOk);
  CHECK(r.summary.at("regime") == "StrictlyAbove");
  CHECK(fs::exists(dir / "ok" / "config.json"));
  CHECK(fs::exists(dir / "ok" / "conditions.json"));
  CHECK_FALSE(fs::exists(dir / "ok" / "errors.json"));
  CHECK(json::parse(slurp(dir / "ok" / "config.json")) == to_json(config_from_json(j)));

  // A missing required option is a validation failure with exit code 2.
  j = base_config("classify");
  j["output"] = {{"dir", (dir / "invalid").string()}};
  r = run(config_from_json(j));
  CHECK(r.exit_code == kExitValidation);
  const json err = json::parse(slurp(dir / "invalid" / "errors.json"));
  CHECK(err.at("exit_code") == kExitValidation);
  CHECK(err.at("kind") == "validation");

  // An amplitude beyond the series range is a numeric failure with exit code 3.
  j = base_config("oscillatory");
  j["system"]["psi"] = {{"kind", "trig_poly"}, {"period", 2.0 * std::numbers::pi}, {"cos", {1.0}}, {"sin", json::array()}};
  j["numeric"] = {{"options", {{"h_min", 1e15}, {"h_max", 1e17}, {"points", 100}}}};
  j["output"] = {{"dir", (dir / "numeric").string()}};
  r = run(config_from_json(j));
  CHECK(r.exit_code == kExitNumeric);
  CHECK(fs::exists(dir / "numeric" / "errors.json"));
  CHECK(fs::exists(dir / "numeric" / "config.json"));

  // A successful rerun clears a stale errors.json.
  j = base_config("conditions");
  j["output"] = {{"dir", (dir / "invalid").string()}};
  CHECK(run(config_from_json(j)).exit_code == kExitOk);
  CHECK_FALSE(fs::exists(dir / "invalid" / "errors.json"));
  fs::remove_all(dir);
}

TEST_CASE("classify and simulate outputs") {
  const fs::path dir = scratch("outputs");
  json j = base_config("classify");
  j["numeric"] = {{"N", 60}, {"options", {{"I0", 25.0}}}};
  j["output"] = {{"dir", (dir / "classify").string()}};
  RunResult r = run(config_from_json(j));
  REQUIRE(r.exit_code == kExitOk);
  const std::string csv = slurp(dir / "classify" / "orbit.csv");
  CHECK(csv.rfind("k,t,x,y,I,theta_lift\r\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 62);
  CHECK(json::parse(slurp(dir / "classify" / "verdict.json")).contains("verdict"));

  j = base_config("simulate");
  j["numeric"] = {{"horizon", 10.0}, {"options", {{"x0", 1.0}, {"samples", 5}}}};
  j["output"] = {{"dir", (dir / "simulate").string()}, {"formats", {"csv"}}};
  r = run(config_from_json(j));
  REQUIRE(r.exit_code == kExitOk);
  CHECK(fs::exists(dir / "simulate" / "trajectory.csv"));
  CHECK_FALSE(fs::exists(dir / "simulate" / "simulate.json"));
  fs::remove_all(dir);
}

TEST_CASE("scenario catalog") {
  const auto& list = list_scenarios();
  CHECK(list.size() >= 5);
  for (const char* name : {"ding", "ll-bounded", "critical-pair", "twist", "oscillating-potential"}) {
    const Scenario& s = find_scenario(name);
    CHECK(s.name == name);
    CHECK_FALSE(s.claim.empty());
    CHECK_FALSE(s.steps.empty());
    for (const auto& step : s.steps) CHECK_NOTHROW(config_from_json(to_json(step.config)));
  }
  CHECK_THROWS_AS(find_scenario("nope"), Error);
}

TEST_CASE("command-line front end") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";

  CHECK(lab("scenarios", log) == 0);
  const json list = json::parse(slurp(log));
  CHECK(list.size() == list_scenarios().size());

  CHECK(lab("conditions --scenario ding --quiet --out " + (dir / "c").string(), log) == 0);
  CHECK(json::parse(slurp(dir / "c" / "conditions.json")).at("regime") == "StrictlyAbove");

  CHECK(lab("normalform-check --scenario oscillating-potential --h 1e4 --quiet --out " + (dir / "nf").string(), log) == 0);
  CHECK(fs::exists(dir / "nf" / "normalform.json"));

  CHECK(lab("conditions --scenario ding --tol 1e-3 --out " + (dir / "bad").string(), log) == kExitValidation);
  CHECK(lab("conditions --scenario nope", log) == kExitValidation);
  CHECK(lab("conditions --bogus-flag", log) == kExitValidation);
  CHECK(lab("conditions", log) == kExitValidation);

  CHECK(lab("oscillatory --psi '{\"kind\":\"trig_poly\",\"period\":6.283185307179586,\"cos\":[1],\"sin\":[]}' "
            "--h-min 1e15 --h-max 1e17 --points 100 --out " + (dir / "o").string(), log) == kExitNumeric);

  std::ofstream(dir / "sys.json") << R"({"n":1,"g":{"kind":"arctan"},"p":{"kind":"trig_poly","period":6.283185307179586,"cos":[1],"sin":[]}})";
  CHECK(lab("classify --system " + (dir / "sys.json").string() + " --I0 100 --strobes 40 --quiet --out " +
                (dir / "k").string(), log) == 0);
  const json verdict = json::parse(slurp(dir / "k" / "verdict.json"));
  CHECK(verdict.at("horizon_strobes") == 40);
  CHECK(verdict.at("I0").get<double>() == doctest::Approx(100.0).epsilon(1e-14));

  json cfg = base_config("conditions");
  cfg["output"] = {{"dir", (dir / "cfg").string()}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  CHECK(lab("run --config " + (dir / "cfg.json").string() + " --quiet", log) == 0);
  CHECK(fs::exists(dir / "cfg" / "conditions.json"));
  fs::remove_all(dir);
}
