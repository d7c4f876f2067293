#include "duffing/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <tuple>

#include "duffing/action_angle.hpp"
#include "duffing/dynamics.hpp"
#include "duffing/error.hpp"
#include "duffing/oscillatory.hpp"
#include "duffing/resonance_conditions.hpp"

namespace duffing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using nlohmann::json;

struct ExperimentName {
  Experiment experiment;
  std::string_view name;
};

constexpr ExperimentName kExperimentNames[] = {
    {Experiment::Conditions, "conditions"},   {Experiment::Averages, "averages"},
    {Experiment::Oscillatory, "oscillatory"}, {Experiment::Simulate, "simulate"},
    {Experiment::Poincare, "poincare"},       {Experiment::Classify, "classify"},
    {Experiment::Sweep, "sweep"},             {Experiment::EscapeScan, "escape_scan"},
    {Experiment::NormalformCheck, "normalform_check"},
};

void require_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorKind::Validation, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& entry : kExperimentNames)
    if (entry.experiment == e) return entry.name;
  return "unknown";
}

Experiment experiment_from_string(std::string_view name) {
  std::string canonical(name);
  std::replace(canonical.begin(), canonical.end(), '-', '_');
  for (const auto& entry : kExperimentNames)
    if (entry.name == canonical) return entry.experiment;
  throw Error(ErrorKind::Validation, "unknown experiment '" + std::string(name) + "'");
}

DuffingSystem SystemConfig::build() const { return DuffingSystem::make(n, g, psi, p); }

double NumericConfig::option(const std::string& key, double fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

bool NumericConfig::flag(const std::string& key) const {
  const auto it = flags.find(key);
  return it != flags.end() && it->second;
}

bool OutputConfig::wants(Format f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

// ---------------------------------------------------------------------------
// Config (de)serialization

json to_json(const ExperimentConfig& c) {
  json system = {{"n", c.system.n}, {"g", to_json(c.system.g)}, {"p", to_json(c.system.p)}};
  if (!is_identically_zero(c.system.psi)) system["psi"] = to_json(c.system.psi);
  json grids = json::object();
  for (const auto& [k, v] : c.numeric.grids) grids[k] = v;
  json options = json::object();
  for (const auto& [k, v] : c.numeric.options) options[k] = v;
  json flags = json::object();
  for (const auto& [k, v] : c.numeric.flags) flags[k] = v;
  json formats = json::array();
  for (Format f : c.output.formats) formats.push_back(f == Format::Csv ? "csv" : "json");
  return {{"experiment", std::string(to_string(c.experiment))},
          {"system", system},
          {"numeric",
           {{"tol", c.numeric.tol},
            {"N", c.numeric.N},
            {"horizon", c.numeric.horizon},
            {"grids", grids},
            {"options", options},
            {"flags", flags}}},
          {"output", {{"dir", c.output.dir.generic_string()}, {"formats", formats}}}};
}

ExperimentConfig config_from_json(const json& j) {
  require_keys(j, {"experiment", "system", "numeric", "output"}, "config");
  ExperimentConfig c;
  if (!j.contains("experiment") || !j.at("experiment").is_string())
    throw Error(ErrorKind::Validation, "config requires a string 'experiment'");
  c.experiment = experiment_from_string(j.at("experiment").get<std::string>());

  if (!j.contains("system")) throw Error(ErrorKind::Validation, "config requires 'system'");
  const json& s = j.at("system");
  require_keys(s, {"n", "g", "psi", "p"}, "system");
  if (!s.contains("n") || !s.at("n").is_number_integer())
    throw Error(ErrorKind::Validation, "system requires integer 'n'");
  if (!s.contains("g") || !s.contains("p"))
    throw Error(ErrorKind::Validation, "system requires 'g' and 'p'");
  c.system.n = s.at("n").get<int>();
  c.system.g = spec_from_json(s.at("g"));
  c.system.p = spec_from_json(s.at("p"));
  c.system.psi = s.contains("psi") ? spec_from_json(s.at("psi")) : FunctionSpec::constant(0.0);
  try {
    (void)c.system.build();
  } catch (const Error& e) {
    throw Error(ErrorKind::Validation, std::string("system rejected: ") + e.what());
  }

  if (j.contains("numeric")) {
    const json& nj = j.at("numeric");
    require_keys(nj, {"tol", "N", "horizon", "grids", "options", "flags"}, "numeric");
    try {
      if (nj.contains("tol")) c.numeric.tol = nj.at("tol").get<double>();
      if (nj.contains("N")) c.numeric.N = nj.at("N").get<std::size_t>();
      if (nj.contains("horizon")) c.numeric.horizon = nj.at("horizon").get<double>();
      if (nj.contains("grids"))
        for (const auto& [k, v] : nj.at("grids").items()) c.numeric.grids[k] = v.get<std::vector<double>>();
      if (nj.contains("options"))
        for (const auto& [k, v] : nj.at("options").items()) {
          if (!v.is_number()) throw Error(ErrorKind::Validation, "option '" + k + "' must be a number");
          c.numeric.options[k] = v.get<double>();
        }
      if (nj.contains("flags"))
        for (const auto& [k, v] : nj.at("flags").items()) {
          if (!v.is_boolean()) throw Error(ErrorKind::Validation, "flag '" + k + "' must be a boolean");
          c.numeric.flags[k] = v.get<bool>();
        }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Validation, std::string("numeric block: ") + e.what());
    }
  }
  if (!(c.numeric.tol >= 1e-14 && c.numeric.tol <= 1e-6))
    throw Error(ErrorKind::Validation, "numeric.tol must lie in [1e-14, 1e-6]");
  if (c.numeric.N < 1) throw Error(ErrorKind::Validation, "numeric.N must be >= 1");

  if (j.contains("output")) {
    const json& oj = j.at("output");
    require_keys(oj, {"dir", "formats"}, "output");
    if (oj.contains("dir")) {
      if (!oj.at("dir").is_string()) throw Error(ErrorKind::Validation, "output.dir must be a string");
      c.output.dir = oj.at("dir").get<std::string>();
    }
    if (oj.contains("formats")) {
      if (!oj.at("formats").is_array()) throw Error(ErrorKind::Validation, "output.formats must be an array");
      c.output.formats.clear();
      for (const auto& f : oj.at("formats")) {
        const std::string name = f.is_string() ? f.get<std::string>() : "";
        if (name == "csv")
          c.output.formats.push_back(Format::Csv);
        else if (name == "json")
          c.output.formats.push_back(Format::Json);
        else
          throw Error(ErrorKind::Validation, "output.formats accepts only csv and json");
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Files

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::add(double v) {
  rows_.back().push_back(format_double(v));
  return *this;
}

CsvTable& CsvTable::add(std::size_t v) {
  rows_.back().push_back(std::to_string(v));
  return *this;
}

CsvTable& CsvTable::add(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) {
    rows_.back().push_back(v);
    return *this;
  }
  std::string quoted = "\"";
  for (char ch : v) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  rows_.back().push_back(quoted);
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

class Sink {
 public:
  explicit Sink(const OutputConfig& out) : out_(out) {}

  void json_file(const std::string& name, const json& j) {
    if (!out_.wants(Format::Json)) return;
    write_file_atomic(out_.dir / name, j.dump(2) + "\n");
    files_.push_back(name);
  }
  void csv_file(const std::string& name, const CsvTable& table) {
    if (!out_.wants(Format::Csv)) return;
    write_file_atomic(out_.dir / name, table.str());
    files_.push_back(name);
  }
  void always(const std::string& name, const json& j) {
    write_file_atomic(out_.dir / name, j.dump(2) + "\n");
    files_.push_back(name);
  }
  std::vector<std::string> files() const { return files_; }

 private:
  const OutputConfig& out_;
  std::vector<std::string> files_;
};

double require_option(const NumericConfig& num, const std::string& key) {
  const auto it = num.options.find(key);
  if (it == num.options.end()) throw Error(ErrorKind::Validation, "numeric.options." + key + " is required");
  return it->second;
}

const std::vector<double>& require_grid(const NumericConfig& num, const std::string& key) {
  const auto it = num.grids.find(key);
  if (it == num.grids.end() || it->second.empty())
    throw Error(ErrorKind::Validation, "numeric.grids." + key + " is required");
  return it->second;
}

std::size_t count_option(const NumericConfig& num, const std::string& key, double fallback) {
  const double v = num.option(key, fallback);
  if (!(v >= 1.0) || v != std::floor(v))
    throw Error(ErrorKind::Validation, "numeric.options." + key + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

PhaseState initial_state(const DuffingSystem& sys, const NumericConfig& num) {
  const double t0 = num.option("t0", 0.0);
  if (num.options.count("x0"))
    return {num.option("x0", 0.0), num.option("y0", 0.0), t0};
  const double I0 = require_option(num, "I0");
  return from_action_angle({I0, num.option("theta0", 0.0), t0}, sys.n());
}

json stats_json(const IntegratorStats& s) {
  return {{"steps", s.steps}, {"rejected", s.rejected}, {"max_error_estimate", s.max_error_estimate}};
}

json run_conditions(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const ConditionReport rep = lazer_leach_report(sys);
  json j = to_json(rep);
  if (num.flag("d_fit")) {
    try {
      const CriticalDEstimate est =
          critical_d_estimate(sys, num.option("h_min", 1e4), num.option("h_max", 1e9),
                              count_option(num, "points", 12));
      json fit = to_json(est);
      fit["predicted"] = std::string(to_string(classify_theorem(sys, est)));
      j["d_fit"] = fit;
      CsvTable beta({"h", "beta", "beta_tail"});
      for (const auto& s : est.samples) beta.row().add(s.h).add(s.beta).add(s.beta_tail);
      sink.csv_file("beta.csv", beta);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FitDegenerate) throw;
      j["d_fit"] = {{"error", e.what()}};
    }
  }
  sink.json_file("conditions.json", j);
  return j;
}

json run_averages(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const auto& grid = require_grid(num, "I");
  CsvTable table({"I", "avg_f1", "scaled"});
  for (double I : grid) {
    const double v = avg_f1(sys, I);
    table.row().add(I).add(v).add(v / std::sqrt(I));
  }
  sink.csv_file("averages.csv", table);
  json j = {{"points", grid.size()}};
  if (num.flag("check_asymptotics")) {
    const double limit = avg_f1_limit_constant(sys);
    const double top = grid.back();
    const double scaled = avg_f1(sys, top) / std::sqrt(top);
    j["limit_constant"] = limit;
    j["scaled_at_largest_I"] = scaled;
    j["limit_relative_error"] = limit != 0.0 ? std::abs(scaled - limit) / std::abs(limit) : scaled;
    try {
      j["derivative_scaling"] = to_json(avg_f1_derivative_check(sys, grid));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FitDegenerate && e.kind() != ErrorKind::Validation) throw;
      j["derivative_scaling"] = {{"error", e.what()}};
    }
    sink.json_file("asymptotics.json", j);
  }
  return j;
}

json run_normalform(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const double h = require_option(num, "h");
  json j = to_json(normalform_check(sys, h, count_option(num, "theta_samples", 64),
                                    count_option(num, "t_samples", 8)));
  if (h >= energy_time_floor(sys)) {
    json rows = json::array();
    for (int k = 0; k < 4; ++k) {
      const double t = 0.7 * k + 0.1, theta = 1.3 * k + 0.2;
      const EnergyTimeSolution sol = solve_energy_time(sys, h, t, theta);
      rows.push_back({{"t", t},
                      {"theta", theta},
                      {"R", sol.R},
                      {"iterations", sol.iterations},
                      {"residual", sol.residual},
                      {"bound", sol.bound},
                      {"within_bound", sol.within_bound}});
    }
    j["energy_time"] = rows;
  }
  sink.json_file("normalform.json", j);
  return j;
}

json run_oscillatory(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const PsiDecayReport rep =
      psi_average_decay(sys, num.option("h_min", 1e4), num.option("h_max", 1e8),
                        count_option(num, "points", 400), num.option("window_factor", 2.0));
  CsvTable table({"h", "psi_average"});
  for (const auto& [h, v] : rep.samples) table.row().add(h).add(v);
  sink.csv_file("psi_average.csv", table);
  json j = {{"decay_fit", to_json(rep.fit)}};
  if (num.grids.count("a")) j["endpoint"] = to_json(endpoint_expansion_check(num.grids.at("a")));
  sink.json_file("oscillatory.json", j);
  return j;
}

json run_simulate(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const PhaseState s0 = initial_state(sys, num);
  if (!(num.horizon > 0.0)) throw Error(ErrorKind::Validation, "simulate needs numeric.horizon > 0");
  const std::size_t samples = count_option(num, "samples", 200);
  const Rhs2 f = duffing_rhs(sys);
  Dop853 stepper(num.tol);
  CsvTable table({"t", "x", "y", "I", "H"});
  Vec2 y = {s0.x, s0.y};
  const double nn = static_cast<double>(sys.n());
  auto emit = [&](double t) {
    const PhaseState s{y[0], y[1], t};
    table.row().add(t).add(y[0]).add(y[1]).add(0.5 * nn * (y[0] * y[0] + y[1] * y[1])).add(hamiltonian(sys, s));
  };
  emit(s0.t);
  double t = s0.t;
  for (std::size_t k = 1; k <= samples; ++k) {
    const double next = s0.t + num.horizon * static_cast<double>(k) / static_cast<double>(samples);
    y = stepper.advance(f, t, y, next);
    t = next;
    emit(t);
  }
  sink.csv_file("trajectory.csv", table);
  json j = {{"initial", {s0.x, s0.y, s0.t}},
            {"final", {y[0], y[1], t}},
            {"integrator_stats", stats_json(stepper.stats())}};
  sink.json_file("simulate.json", j);
  return j;
}

CsvTable orbit_table(const OrbitRecord& rec) {
  CsvTable table({"k", "t", "x", "y", "I", "theta_lift"});
  for (const auto& p : rec.iterates) table.row().add(p.k).add(p.t).add(p.x).add(p.y).add(p.I).add(p.theta_lift);
  return table;
}

json run_poincare(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  json j;
  if (num.options.count("I0") || num.options.count("x0")) {
    const OrbitRecord rec = orbit(sys, initial_state(sys, num), num.N, num.tol);
    sink.csv_file("orbit.csv", orbit_table(rec));
    j["integrator_stats"] = stats_json(rec.integrator_stats);
    j["hit_ceiling"] = rec.hit_ceiling;
    try {
      j["rotation_number"] = rotation_number(rec);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotApplicable) throw;
      j["rotation_number"] = nullptr;
    }
  }
  if (num.grids.count("I")) j["twist"] = to_json(twist_scaling_check(sys, num.grids.at("I"), num.tol, num.N));
  if (j.is_null()) throw Error(ErrorKind::Validation, "poincare needs options.I0/x0 or grids.I");
  sink.json_file("poincare.json", j);
  return j;
}

json run_classify(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const OrbitRecord rec = orbit(sys, initial_state(sys, num), num.N, num.tol);
  sink.csv_file("orbit.csv", orbit_table(rec));
  const ClassificationVerdict v = classify_orbit(rec, num.option("escape_factor", kEscapeFactor),
                                                 num.option("confine_factor", kConfineFactor));
  json j = to_json(v);
  j["integrator_stats"] = stats_json(rec.integrator_stats);
  sink.json_file("verdict.json", j);
  return j;
}

json sweep_json(const std::vector<SweepEntry>& entries, CsvTable& table,
                const std::vector<PhaseState>& initial) {
  json list = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    table.row().add(i).add(initial[i].x).add(initial[i].y).add(initial[i].t);
    if (e.verdict) {
      const auto& v = *e.verdict;
      table.add(std::string(to_string(v.verdict))).add(v.I0).add(v.max_I).add(v.min_I);
      table.add(v.growth_fit ? format_double(v.growth_fit->slope) : std::string());
      table.add(std::string());
      list.push_back(to_json(v));
    } else {
      table.add(std::string("Failed")).add(std::string()).add(std::string()).add(std::string());
      table.add(std::string()).add(e.error);
      list.push_back({{"error", e.error}});
    }
  }
  return list;
}

json run_sweep(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const auto& I0 = require_grid(num, "I0");
  std::vector<PhaseState> initial;
  for (double I : I0)
    initial.push_back(from_action_angle({I, num.option("theta0", 0.0), num.option("t0", 0.0)}, sys.n()));
  const auto entries = sweep(sys, initial, num.N, num.tol);
  CsvTable table({"index", "x0", "y0", "t0", "verdict", "I0", "max_I", "min_I", "growth_slope", "error"});
  json list = sweep_json(entries, table, initial);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& e : entries)
    if (e.verdict) ++counts[static_cast<int>(e.verdict->verdict)];
  json j = {{"orbits", entries.size()},
            {"bounded", counts[0]},
            {"escaping", counts[1]},
            {"undecided", counts[2]},
            {"verdicts", list}};
  sink.csv_file("sweep.csv", table);
  sink.json_file("sweep.json", j);
  return j;
}

json run_escape_scan(const DuffingSystem& sys, const NumericConfig& num, Sink& sink) {
  const double I0 = require_option(num, "I0");
  const std::size_t phases = count_option(num, "phases", 64);
  const EscapeScanReport rep = critical_escape_scan(sys, I0, phases, num.N, num.tol);
  CsvTable table({"phase", "t0", "verdict", "max_I", "min_I", "growth_slope"});
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    table.row().add(k).add(kTwoPi * static_cast<double>(k) / static_cast<double>(phases));
    const auto& e = rep.entries[k];
    if (e.verdict) {
      table.add(std::string(to_string(e.verdict->verdict))).add(e.verdict->max_I).add(e.verdict->min_I);
      table.add(e.verdict->growth_fit ? format_double(e.verdict->growth_fit->slope) : std::string());
    } else {
      table.add(std::string("Failed")).add(std::string()).add(std::string()).add(std::string());
    }
  }
  sink.csv_file("escape_scan.csv", table);
  json j = to_json(rep);
  sink.json_file("escape_scan.json", j);
  return j;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  Sink sink(config.output);
  const auto errors_path = config.output.dir / "errors.json";
  auto fail = [&](int code, std::string_view kind, const std::string& message) {
    result.exit_code = code;
    result.error = message;
    result.summary = {{"kind", std::string(kind)}, {"message", message}, {"exit_code", code}};
    try {
      write_file_atomic(errors_path, result.summary.dump(2) + "\n");
      result.files.push_back("errors.json");
    } catch (const std::exception&) {
    }
  };
  try {
    std::filesystem::create_directories(config.output.dir);
    std::filesystem::remove(errors_path);
    sink.always("config.json", to_json(config));
    const DuffingSystem sys = config.system.build();
    const NumericConfig& num = config.numeric;
    switch (config.experiment) {
      case Experiment::Conditions: result.summary = run_conditions(sys, num, sink); break;
      case Experiment::Averages: result.summary = run_averages(sys, num, sink); break;
      case Experiment::Oscillatory: result.summary = run_oscillatory(sys, num, sink); break;
      case Experiment::Simulate: result.summary = run_simulate(sys, num, sink); break;
      case Experiment::Poincare: result.summary = run_poincare(sys, num, sink); break;
      case Experiment::Classify: result.summary = run_classify(sys, num, sink); break;
      case Experiment::Sweep: result.summary = run_sweep(sys, num, sink); break;
      case Experiment::EscapeScan: result.summary = run_escape_scan(sys, num, sink); break;
      case Experiment::NormalformCheck: result.summary = run_normalform(sys, num, sink); break;
    }
    result.files = sink.files();
  } catch (const Error& e) {
    result.files = sink.files();
    fail(is_numeric_failure(e.kind()) ? kExitNumeric : kExitValidation, to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    result.files = sink.files();
    fail(kExitValidation, "validation", e.what());
  } catch (const std::exception& e) {
    result.files = sink.files();
    fail(kExitNumeric, "internal", e.what());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

FunctionSpec cos_forcing(double amplitude, int n) {
  std::vector<double> cos(static_cast<std::size_t>(n), 0.0);
  cos.back() = amplitude;
  return FunctionSpec::trig_poly(kTwoPi, cos, {});
}

// arctan x + x / (1 + x^2) + c (1 - d) x (1 + x^2)^(-(1 + d) / 2): the rational
// term removes the logarithmic part of the arctan antiderivative, so the
// correction to the averaged energy scales like h^((1 - d) / 2).
FunctionSpec critical_family(double d, double c) {
  return FunctionSpec::sum({FunctionSpec::arctan(), FunctionSpec::rational1(1.0),
                            FunctionSpec::algebraic_tail(c * (1.0 - d), 0.5 * (1.0 + d))});
}

ExperimentConfig base(int n, FunctionSpec g, FunctionSpec psi, FunctionSpec p, Experiment e) {
  ExperimentConfig c;
  c.system = {n, std::move(g), std::move(psi), std::move(p)};
  c.experiment = e;
  return c;
}

std::vector<Scenario> build_scenarios() {
  std::vector<Scenario> out;
  const FunctionSpec zero = FunctionSpec::constant(0.0);

  {
    Scenario s{"ding", "g = arctan x, p = 4 cos t, n = 1",
               "Forcing above the resonance threshold: solutions grow without bound.", {}};
    auto cond = base(1, FunctionSpec::arctan(), zero, cos_forcing(4.0, 1), Experiment::Conditions);
    auto cls = cond;
    cls.experiment = Experiment::Classify;
    cls.numeric.N = 500;
    cls.numeric.options = {{"I0", 25.0}};
    s.steps = {{"conditions", cond}, {"classify", cls}};
    out.push_back(std::move(s));
  }
  {
    Scenario s{"ll-bounded", "g = arctan x, psi = sin x, p = cos t, n = 1",
               "Forcing below the resonance threshold with an oscillating potential: all solutions stay bounded.",
               {}};
    auto cond = base(1, FunctionSpec::arctan(), FunctionSpec::trig_poly(kTwoPi, {}, {1.0}),
                     cos_forcing(1.0, 1), Experiment::Conditions);
    auto sw = cond;
    sw.experiment = Experiment::Sweep;
    sw.numeric.N = 2000;
    sw.numeric.grids = {{"I0", geometric_grid(50.0, 500.0, 20)}};
    // theta0 = t0 = 0 starts each orbit at the largest action on its averaged level set.
    sw.numeric.options = {{"theta0", 0.0}, {"t0", 0.0}};
    s.steps = {{"conditions", cond}, {"sweep", sw}};
    out.push_back(std::move(s));
  }
  {
    Scenario s{"critical-pair",
               "g = arctan x + x/(1+x^2) + c(1-d) x (1+x^2)^(-(1+d)/2), p = 2 cos t, n = 1; "
               "members d = 1/3 (c = 30) and d = 2 (c = 1)",
               "Threshold equality: a tail exponent d < 1 keeps solutions bounded, d > 1 lets them escape.",
               {}};
    for (const auto& [tag, d, c] : {std::tuple{"low", 1.0 / 3.0, 30.0}, std::tuple{"high", 2.0, 1.0}}) {
      auto cond = base(1, critical_family(d, c), zero, cos_forcing(2.0, 1), Experiment::Conditions);
      cond.numeric.flags = {{"d_fit", true}};
      auto scan = cond;
      scan.experiment = Experiment::EscapeScan;
      scan.numeric.flags.clear();
      scan.numeric.N = 2000;
      scan.numeric.options = {{"I0", 1e4}, {"phases", 64.0}};
      s.steps.push_back({std::string("conditions-") + tag, cond});
      s.steps.push_back({std::string("escape-scan-") + tag, scan});
    }
    out.push_back(std::move(s));
  }
  {
    Scenario s{"critical-example", "g = arctan x + 2x(1+x^2)^(-2/3), p = 2 cos t, n = 1",
               "Threshold equality with an algebraic tail; the fitted tail exponent decides the regime.", {}};
    auto g = FunctionSpec::sum({FunctionSpec::arctan(), FunctionSpec::algebraic_tail(2.0, 2.0 / 3.0)});
    auto cond = base(1, g, zero, cos_forcing(2.0, 1), Experiment::Conditions);
    cond.numeric.flags = {{"d_fit", true}};
    auto avg = cond;
    avg.experiment = Experiment::Averages;
    avg.numeric.flags = {{"check_asymptotics", true}};
    avg.numeric.grids = {{"I", geometric_grid(1e4, 1e8, 9)}};
    s.steps = {{"conditions", cond}, {"averages", avg}};
    out.push_back(std::move(s));
  }
  {
    Scenario s{"twist", "g = arctan x, p = psi = 0, n = 1",
               "The unforced rotation number exceeds n by a term decaying like I^(-1/2).", {}};
    auto pc = base(1, FunctionSpec::arctan(), zero, zero, Experiment::Poincare);
    pc.numeric.tol = 1e-12;
    pc.numeric.N = 200;
    pc.numeric.grids = {{"I", geometric_grid(1e3, 1e6, 8)}};
    pc.numeric.options = {{"I0", 1e4}};
    s.steps = {{"poincare", pc}};
    out.push_back(std::move(s));
  }
  {
    Scenario s{"oscillating-potential", "g = arctan x, psi = cos x, p = cos t, n = 1",
               "The angle average of the oscillating potential decays like h^(-1/4).", {}};
    auto osc = base(1, FunctionSpec::arctan(), FunctionSpec::trig_poly(kTwoPi, {1.0}, {}),
                    cos_forcing(1.0, 1), Experiment::Oscillatory);
    osc.numeric.options = {{"h_min", 1e4}, {"h_max", 1e8}, {"points", 400.0}};
    osc.numeric.grids = {{"a", geometric_grid(1e2, 1e5, 10)}};
    auto nf = osc;
    nf.experiment = Experiment::NormalformCheck;
    nf.numeric.grids.clear();
    nf.numeric.options = {{"h", 1e4}};
    s.steps = {{"oscillatory", osc}, {"normalform-check", nf}};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

const std::vector<Scenario>& list_scenarios() {
  static const std::vector<Scenario> scenarios = build_scenarios();
  return scenarios;
}

const Scenario& find_scenario(std::string_view name) {
  for (const auto& s : list_scenarios())
    if (s.name == name) return s;
  throw Error(ErrorKind::Validation, "unknown scenario '" + std::string(name) + "'");
}

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  RunResult result;
  json steps = json::object();
  for (const auto& step : scenario.steps) {
    ExperimentConfig config = step.config;
    config.output.dir = dir / step.tag;
    const RunResult r = run(config);
    steps[step.tag] = {{"exit_code", r.exit_code}, {"summary", r.summary}};
    for (const auto& f : r.files) result.files.push_back(step.tag + "/" + f);
    if (r.exit_code != kExitOk && result.exit_code == kExitOk) {
      result.exit_code = r.exit_code;
      result.error = step.tag + ": " + r.error;
    }
  }
  result.summary = {{"scenario", scenario.name},
                    {"description", scenario.description},
                    {"claim", scenario.claim},
                    {"exit_code", result.exit_code},
                    {"steps", steps}};
  write_file_atomic(dir / "scenario.json", result.summary.dump(2) + "\n");
  result.files.push_back("scenario.json");
  return result;
}

}  // namespace duffing
