#pragma once

// Experiment configuration, dispatch, atomic result persistence and the builtin
// scenario catalog.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "duffing/function_model.hpp"

namespace duffing {

enum class Experiment {
  Conditions,
  Averages,
  Oscillatory,
  Simulate,
  Poincare,
  Classify,
  Sweep,
  EscapeScan,
  NormalformCheck,
};

std::string_view to_string(Experiment e);
/// Accepts snake_case and kebab-case names. Throws Validation.
Experiment experiment_from_string(std::string_view name);

struct SystemConfig {
  int n = 1;
  FunctionSpec g;
  FunctionSpec psi;
  FunctionSpec p;

  DuffingSystem build() const;
};

struct NumericConfig {
  double tol = 1e-10;
  std::size_t N = 200;
  double horizon = 0.0;
  std::map<std::string, std::vector<double>> grids;
  /// Scalar knobs such as I0, t0, h or phases.
  std::map<std::string, double> options;
  /// Boolean switches such as d_fit or check_asymptotics.
  std::map<std::string, bool> flags;

  double option(const std::string& key, double fallback) const;
  bool flag(const std::string& key) const;
};

enum class Format { Csv, Json };

struct OutputConfig {
  std::filesystem::path dir = "out";
  std::vector<Format> formats = {Format::Csv, Format::Json};

  bool wants(Format f) const;
};

struct ExperimentConfig {
  SystemConfig system;
  Experiment experiment = Experiment::Conditions;
  NumericConfig numeric;
  OutputConfig output;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Throws Validation for schema violations and inadmissible functions.
ExperimentConfig config_from_json(const nlohmann::json& j);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json summary;           // main report of the run
  std::vector<std::string> files;   // written files, relative to the output dir
  std::string error;                // message when exit_code != 0
};

/// Dispatches one experiment. Never throws for module errors: they become exit
/// codes plus an errors.json. Every run writes config.json.
RunResult run(const ExperimentConfig& config);

struct ScenarioStep {
  std::string tag;
  ExperimentConfig config;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string claim;  // the qualitative behavior the scenario reproduces
  std::vector<ScenarioStep> steps;
};

/// Builtin scenarios in stable order.
const std::vector<Scenario>& list_scenarios();
/// Throws Validation for unknown names.
const Scenario& find_scenario(std::string_view name);

/// Runs every step into dir/<tag>/ and writes dir/scenario.json.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// Atomic file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// RFC 4180 CSV with a mandatory header; numbers use 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(std::size_t v);
  CsvTable& add(const std::string& v);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double v);

}  // namespace duffing
