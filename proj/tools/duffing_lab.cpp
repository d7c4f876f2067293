// duffing_lab: command-line front end for the experiment harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "duffing/error.hpp"
#include "duffing/harness.hpp"

namespace {

using duffing::Error;
using duffing::ErrorKind;
using duffing::Experiment;
using duffing::ExperimentConfig;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Validation, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, path + ": " + e.what());
  }
}

// Accepts a path to a JSON file or an inline JSON document.
json read_json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Validation, std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

struct CommonArgs {
  std::string system_file;
  std::string scenario;
  std::string out = "out";
  std::optional<double> tol;
  std::optional<std::size_t> strobes;
  std::string formats;
  bool quiet = false;
};

struct ExperimentArgs {
  // Scalars are only written into the config when given on the command line.
  std::map<std::string, double> options;
  std::map<std::string, std::vector<double>> grids;
  std::map<std::string, bool> flags;
  std::optional<double> horizon;
  std::string psi;
};

void add_common(CLI::App* sub, CommonArgs& c) {
  auto* sys = sub->add_option("--system", c.system_file, "System JSON file (n, g, psi, p)");
  auto* sc = sub->add_option("--scenario", c.scenario, "Builtin scenario supplying the system");
  sys->excludes(sc);
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--tol", c.tol, "Integrator / tolerance setting");
  sub->add_option("--strobes", c.strobes, "Number of strobe iterates N");
  sub->add_option("--format", c.formats, "Comma-separated subset of csv,json");
  sub->add_flag("--quiet", c.quiet, "Do not print the summary");
}

void scalar(CLI::App* sub, ExperimentArgs& a, const std::string& flag, const std::string& key,
            const std::string& help) {
  sub->add_option_function<double>(flag, [&a, key](double v) { a.options[key] = v; }, help);
}

void grid(CLI::App* sub, ExperimentArgs& a, const std::string& flag, const std::string& key,
          const std::string& help) {
  sub->add_option_function<std::vector<double>>(flag, [&a, key](const std::vector<double>& v) { a.grids[key] = v; },
                                                help)
      ->delimiter(',');
}

void boolean(CLI::App* sub, ExperimentArgs& a, const std::string& flag, const std::string& key,
             const std::string& help) {
  sub->add_flag_callback(flag, [&a, key] { a.flags[key] = true; }, help);
}

void initial_state_options(CLI::App* sub, ExperimentArgs& a) {
  scalar(sub, a, "--I0", "I0", "Initial action");
  scalar(sub, a, "--theta0", "theta0", "Initial angle (with --I0)");
  scalar(sub, a, "--x0", "x0", "Initial position (overrides --I0)");
  scalar(sub, a, "--y0", "y0", "Initial scaled velocity");
  scalar(sub, a, "--t0", "t0", "Initial time");
}

ExperimentConfig resolve(Experiment experiment, const CommonArgs& c, const ExperimentArgs& a) {
  ExperimentConfig config;
  config.experiment = experiment;
  if (!c.scenario.empty()) {
    const auto& scenario = duffing::find_scenario(c.scenario);
    config = scenario.steps.front().config;
    for (const auto& step : scenario.steps)
      if (step.config.experiment == experiment) {
        config = step.config;
        break;
      }
    if (config.experiment != experiment) {
      config.experiment = experiment;
      config.numeric = {};
    }
  } else if (!c.system_file.empty()) {
    json j = {{"experiment", std::string(duffing::to_string(experiment))},
              {"system", read_json_file(c.system_file)}};
    config = duffing::config_from_json(j);
  } else if (experiment == Experiment::Oscillatory && !a.psi.empty()) {
    config.system.g = duffing::FunctionSpec::constant(0.0);
    config.system.p = duffing::FunctionSpec::constant(0.0);
  } else {
    throw Error(ErrorKind::Validation, "one of --system or --scenario is required");
  }
  if (!a.psi.empty()) config.system.psi = duffing::spec_from_json(read_json_argument(a.psi));

  for (const auto& [k, v] : a.options) config.numeric.options[k] = v;
  for (const auto& [k, v] : a.grids) config.numeric.grids[k] = v;
  for (const auto& [k, v] : a.flags) config.numeric.flags[k] = v;
  if (a.horizon) config.numeric.horizon = *a.horizon;
  if (c.tol) config.numeric.tol = *c.tol;
  if (c.strobes) config.numeric.N = *c.strobes;
  config.output.dir = c.out;
  if (!c.formats.empty()) {
    json formats = json::array();
    std::size_t start = 0;
    while (start <= c.formats.size()) {
      const auto end = c.formats.find(',', start);
      formats.push_back(c.formats.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    json j = duffing::to_json(config);
    j["output"]["formats"] = formats;
    config = duffing::config_from_json(j);
  }
  // Round trip through the schema so every check applies to command-line input too.
  return duffing::config_from_json(duffing::to_json(config));
}

int report(const duffing::RunResult& r, bool quiet) {
  if (r.exit_code != duffing::kExitOk) {
    std::cerr << "error: " << r.error << "\n";
    return r.exit_code;
  }
  if (!quiet) std::cout << r.summary.dump(2) << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the resonant Duffing equation x'' + n^2 x + g(x) + psi'(x) = p(t)"};
  app.require_subcommand(1);

  struct Sub {
    Experiment experiment;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  CommonArgs common;
  ExperimentArgs args;

  auto make = [&](const char* name, const char* help, Experiment e) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    subs.push_back({e, sub});
    return sub;
  };

  auto* conditions = make("conditions", "Resonance-threshold report (JSON)", Experiment::Conditions);
  boolean(conditions, args, "--d-fit", "d_fit", "Fit the tail exponent d from beta(h)");
  scalar(conditions, args, "--h-min", "h_min", "Lower end of the beta fit window");
  scalar(conditions, args, "--h-max", "h_max", "Upper end of the beta fit window");
  scalar(conditions, args, "--points", "points", "Grid points of the beta fit");

  auto* averages = make("averages", "Angle averages [f1](I) (CSV + JSON)", Experiment::Averages);
  grid(averages, args, "--I", "I", "Comma-separated actions");
  boolean(averages, args, "--check-asymptotics", "check_asymptotics", "Compare with the large-I limits");

  auto* normalform = make("normalform-check", "Generating-function closure and cancellation residuals",
                          Experiment::NormalformCheck);
  // --h would clash with the short help flag.
  normalform->set_help_flag("--help", "Print this help message and exit");
  scalar(normalform, args, "--h", "h", "Energy level h");

  auto* oscillatory = make("oscillatory", "Oscillating-potential average and its decay fit", Experiment::Oscillatory);
  oscillatory->add_option("--psi", args.psi, "psi function spec (file or inline JSON)");
  scalar(oscillatory, args, "--h-min", "h_min", "Smallest h");
  scalar(oscillatory, args, "--h-max", "h_max", "Largest h");
  scalar(oscillatory, args, "--points", "points", "Number of h samples");
  scalar(oscillatory, args, "--window-factor", "window_factor", "Envelope window ratio");
  grid(oscillatory, args, "--a", "a", "Amplitudes for the endpoint expansion check");

  auto* simulate = make("simulate", "Integrate one trajectory (CSV)", Experiment::Simulate);
  initial_state_options(simulate, args);
  simulate->add_option_function<double>("--horizon", [&](double v) { args.horizon = v; }, "Time span");
  scalar(simulate, args, "--samples", "samples", "Output samples");

  auto* poincare = make("poincare", "Strobe-map orbit, rotation number, twist scaling", Experiment::Poincare);
  initial_state_options(poincare, args);
  grid(poincare, args, "--I", "I", "Actions for the twist scaling check");

  auto* classify = make("classify", "Orbit classification verdict", Experiment::Classify);
  initial_state_options(classify, args);
  scalar(classify, args, "--escape-factor", "escape_factor", "Escape threshold on max I / I0");
  scalar(classify, args, "--confine-factor", "confine_factor", "Confinement threshold on max I / I0");

  auto* sweep = make("sweep", "Classify a grid of initial actions", Experiment::Sweep);
  grid(sweep, args, "--I0", "I0", "Comma-separated initial actions");
  scalar(sweep, args, "--theta0", "theta0", "Common initial angle");
  scalar(sweep, args, "--t0", "t0", "Common initial time");

  auto* escape = make("escape-scan", "Phase scan for escaping orbits", Experiment::EscapeScan);
  scalar(escape, args, "--I0", "I0", "Initial action");
  scalar(escape, args, "--phases", "phases", "Number of launch phases");

  auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios (JSON)");

  std::string run_scenario_name, run_config, run_out = "out";
  bool run_quiet = false;
  auto* runner = app.add_subcommand("run", "Run a builtin scenario or a config file");
  auto* rs = runner->add_option("--scenario", run_scenario_name, "Builtin scenario name");
  auto* rc = runner->add_option("--config", run_config, "Experiment config JSON file");
  rs->excludes(rc);
  runner->add_option("--out", run_out, "Output directory (scenarios)")->capture_default_str();
  runner->add_flag("--quiet", run_quiet, "Do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : duffing::kExitValidation;
  }

  try {
    if (scenarios->parsed()) {
      json list = json::array();
      for (const auto& s : duffing::list_scenarios()) {
        json steps = json::array();
        for (const auto& step : s.steps)
          steps.push_back({{"tag", step.tag}, {"experiment", std::string(duffing::to_string(step.config.experiment))}});
        list.push_back({{"name", s.name}, {"description", s.description}, {"claim", s.claim}, {"steps", steps}});
      }
      std::cout << list.dump(2) << "\n";
      return 0;
    }
    if (runner->parsed()) {
      if (!run_scenario_name.empty())
        return report(duffing::run_scenario(duffing::find_scenario(run_scenario_name), run_out), run_quiet);
      if (!run_config.empty())
        return report(duffing::run(duffing::config_from_json(read_json_file(run_config))), run_quiet);
      std::cerr << "error: run needs --scenario or --config\n";
      return duffing::kExitValidation;
    }
    for (const auto& sub : subs)
      if (sub.app->parsed()) return report(duffing::run(resolve(sub.experiment, common, args)), common.quiet);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return duffing::is_numeric_failure(e.kind()) ? duffing::kExitNumeric : duffing::kExitValidation;
  }
  return duffing::kExitValidation;
}
