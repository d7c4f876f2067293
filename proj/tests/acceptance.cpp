// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "duffing/action_angle.hpp"
#include "duffing/dynamics.hpp"
#include "duffing/error.hpp"
#include "duffing/harness.hpp"
#include "duffing/oscillatory.hpp"
#include "duffing/resonance_conditions.hpp"
#include "oracles.hpp"

using namespace duffing;
using nlohmann::json;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("CRITERION %2d %s: %s | %s | runtime %.1f s (budget %.0f s%s)\n", id, pass ? "PASS" : "FAIL", title,
              out.detail.c_str(), secs, budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

FunctionSpec cos_forcing(double amplitude, int harmonic) {
  std::vector<double> c(static_cast<std::size_t>(harmonic), 0.0);
  c.back() = amplitude;
  return FunctionSpec::trig_poly(2.0 * pi, c, {});
}

// Every regular file under root, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome criterion_f2() {
  oracle::Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int harmonics = rng.integer(1, 4);
    std::vector<double> c(static_cast<std::size_t>(harmonics)), s(c.size());
    for (auto& v : c) v = rng.uniform(-2.0, 2.0);
    for (auto& v : s) v = rng.uniform(-2.0, 2.0);
    const int n = rng.integer(1, harmonics);
    const auto sys = DuffingSystem::make(n, FunctionSpec::arctan(), {},
                                         FunctionSpec::trig_poly(2.0 * pi, c, s, rng.uniform(-1.0, 1.0)));
    const double h = rng.log_uniform(1.0, 1e8), t = rng.uniform(0.0, 2.0 * pi);
    const double nn = n;
    const double ref = oracle::kronrod(
                           [&](double th) {
                             const double x = std::sqrt(2.0 / nn) * std::sqrt(h) * std::cos(nn * th);
                             return -x * eval(sys.p(), t + th) / nn;
                           },
                           0.0, 2.0 * pi, 8) /
                       (2.0 * pi);
    // Relative to |ref|, floored at 1e-9 of the amplitude so exact zeros stay well posed.
    const double scale = std::max(std::abs(ref), 1e-9 * avg_f2_bound(sys, h));
    worst = std::max(worst, std::abs(avg_f2(sys, h, t) - ref) / scale);
  }
  return {worst <= 1e-9, "worst relative error " + fmt("%.3g", worst) + " (limit 1e-9)"};
}

Outcome criterion_f1_limit() {
  const double I = 1e8;
  const double v1 = avg_f1(DuffingSystem::make(1, FunctionSpec::arctan(), {}, {}), I) / std::sqrt(I);
  const double v2 = avg_f1(DuffingSystem::make(2, FunctionSpec::arctan(), {}, {}), I) / std::sqrt(I);
  const double e1 = std::abs(v1 - std::sqrt(2.0)) / std::sqrt(2.0);
  const double e2 = std::abs(v2 - 0.5) / 0.5;
  return {e1 <= 0.02 && e2 <= 0.02,
          "n=1 " + fmt("%.6f", v1) + " (rel " + fmt("%.4f", e1) + "), n=2 " + fmt("%.6f", v2) + " (rel " +
              fmt("%.4f", e2) + "), limit 0.02"};
}

Outcome criterion_f1_derivative() {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, {});
  const auto rep = avg_f1_derivative_check(sys, geometric_grid(1e4, 1e10, 13));
  const double slope = rep.fit.slope;
  return {std::abs(slope + 0.5) <= 0.05, "slope " + fmt("%.4f", slope) + " (target -0.5 +- 0.05)"};
}

Outcome criterion_beta() {
  bool ok = true;
  std::string detail;
  for (double d : {0.25, 1.0 / 3.0, 0.5, 0.75, 1.5, 2.0}) {
    const auto sys = DuffingSystem::make(1, FunctionSpec::algebraic_tail(1.0 - d, 0.5 * (1.0 + d)), {}, {});
    const auto est = critical_d_estimate(sys, 1e4, 1e9, 12);
    const double target = 0.5 * (1.0 - d);
    const bool hit = std::abs(est.fit.slope - target) <= 0.03;
    ok = ok && hit;
    detail += (detail.empty() ? "" : ", ") + fmt("d=%.4g", d) + fmt(" slope %.4f", est.fit.slope) +
              fmt(" vs %.4f", target) + (hit ? "" : " MISS");
  }
  return {ok, detail + " (tolerance 0.03)"};
}

Outcome criterion_oscillatory() {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), FunctionSpec::trig_poly(2.0 * pi, {1.0}, {}), {});
  const double psi_slope = psi_average_decay(sys, 1e4, 1e8, 400).fit.slope;

  std::vector<std::pair<double, double>> j0;
  for (double a : geometric_grid(1e2, 1e6, 400)) j0.emplace_back(a, circle_mean(a, Parity::Cos));
  const double j0_slope = decay_fit_envelope(j0, 2.0).slope;

  oracle::Rng rng(1005);
  double worst_sin = 0.0;
  for (int i = 0; i < 100; ++i)
    worst_sin = std::max(worst_sin, std::abs(circle_mean(rng.log_uniform(1e-3, 1e6), Parity::Sin, rng.integer(1, 4))));

  const bool ok = std::abs(psi_slope + 0.25) <= 0.03 && std::abs(j0_slope + 0.5) <= 0.05 && worst_sin <= 1e-12;
  return {ok, "psi slope " + fmt("%.4f", psi_slope) + " (-0.25 +- 0.03), J0 slope " + fmt("%.4f", j0_slope) +
                  " (-0.5 +- 0.05), max |sin mean| " + fmt("%.2g", worst_sin) + " (<= 1e-12)"};
}

Outcome criterion_integrator() {
  const auto arctan = DuffingSystem::make(1, FunctionSpec::arctan(), {}, {});
  const PhaseState s0{5.0, 0.0, 0.0};
  const double E0 = autonomous_energy(arctan, s0);
  PhaseState s = s0;
  double drift = 0.0;
  for (int k = 0; k < 100; ++k) {
    s = integrate(arctan, s, s.t + 100.0, 1e-12);
    drift = std::max(drift, std::abs(autonomous_energy(arctan, s) - E0) / E0);
  }

  oracle::Rng rng(1006);
  double strobe = 0.0;
  for (int n : {1, 2, 4}) {
    const auto lin = DuffingSystem::make(n, FunctionSpec::constant(0.0), {}, {});
    for (int i = 0; i < 10; ++i) {
      const PhaseState q{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), rng.uniform(0.0, 6.0)};
      const PhaseState out = strobe_map(lin, q, 1e-12);
      strobe = std::max(strobe, std::hypot(out.x - q.x, out.y - q.y) / std::max(1.0, std::hypot(q.x, q.y)));
    }
  }

  double resonant = 0.0;
  for (int n : {1, 2}) {
    std::vector<double> sin_coeffs(static_cast<std::size_t>(n), 0.0);
    sin_coeffs.back() = 1.0;
    const auto sys = DuffingSystem::make(n, FunctionSpec::constant(0.0), {},
                                         FunctionSpec::trig_poly(2.0 * pi, std::vector<double>(n, 0.0), sin_coeffs));
    const oracle::ResonantSolution exact{n, 0.0, 1.0, 0.0, 0.0};
    const double t = 2.0 * pi * 50.0;
    const PhaseState out = integrate(sys, {0.0, 0.0, 0.0}, t, 1e-12);
    resonant = std::max(resonant, std::abs(out.x - exact.x(t)) / std::abs(exact.x(t)));
  }

  const bool ok = drift < 1e-8 && strobe <= 1e-9 && resonant <= 1e-6;
  return {ok, "energy drift " + fmt("%.2g", drift) + " (< 1e-8), strobe identity " + fmt("%.2g", strobe) +
                  " (<= 1e-9), resonant K=50 " + fmt("%.2g", resonant) + " (<= 1e-6)"};
}

const json& step_summary(const RunResult& r, const char* tag) { return r.summary.at("steps").at(tag).at("summary"); }

Outcome criterion_regimes(const RunResult& ding, const RunResult& bounded) {
  const json& dc = step_summary(ding, "conditions");
  const json& dv = step_summary(ding, "classify");
  const double I0 = dv.at("I0").get<double>(), max_I = dv.at("max_I").get<double>();
  const bool ding_ok = ding.exit_code == 0 && dc.at("regime") == "StrictlyAbove" && dv.at("verdict") == "Escaping" &&
                       max_I >= 4.0 * I0 && dv.at("horizon_strobes").get<std::size_t>() <= 500 &&
                       std::abs(I0 - 25.0) <= 1e-9;

  const json& bc = step_summary(bounded, "conditions");
  const json& bs = step_summary(bounded, "sweep");
  double lo = 1e300, hi = 0.0;
  for (const auto& v : bs.at("verdicts")) {
    if (!v.contains("I0")) continue;
    lo = std::min(lo, v.at("I0").get<double>());
    hi = std::max(hi, v.at("I0").get<double>());
  }
  const std::size_t n_bounded = bs.at("bounded").get<std::size_t>(), orbits = bs.at("orbits").get<std::size_t>();
  const auto& psi = find_scenario("ll-bounded").steps.front().config.system.psi;
  const bool bounded_ok = bounded.exit_code == 0 && bc.at("regime") == "StrictlyBelow" && orbits == 20 &&
                          n_bounded == 20 && lo >= 50.0 * (1.0 - 1e-12) && hi <= 500.0 * (1.0 + 1e-12) &&
                          !is_identically_zero(psi);
  return {ding_ok && bounded_ok, "ding: " + std::string(dc.at("regime")) + " + " + std::string(dv.at("verdict")) +
                                     fmt(" max I / I0 = %.3g", max_I / I0) + "; ll-bounded: " +
                                     std::string(bc.at("regime")) + " + " + std::to_string(n_bounded) + "/" +
                                     std::to_string(orbits) + " BoundedEvidence"};
}

Outcome criterion_twist(const RunResult& twist) {
  const json& tw = step_summary(twist, "poincare").at("twist");
  const double slope = tw.at("fit").at("slope").get<double>();
  const bool sign_ok = tw.at("sign_ok").get<bool>();
  return {twist.exit_code == 0 && std::abs(slope + 0.5) <= 0.1 && sign_ok,
          "slope " + fmt("%.4f", slope) + " (-0.5 +- 0.1), sign " + (sign_ok ? "matches" : "MISMATCH")};
}

Outcome criterion_critical(const RunResult& pair) {
  const json& low = step_summary(pair, "escape-scan-low");
  const json& high = step_summary(pair, "escape-scan-high");
  const std::size_t escaping = low.at("escaping").get<std::size_t>();
  const bool positive = high.at("best_has_positive_growth").get<bool>();
  const json& fit = high.at("best").at("growth_fit");
  const std::string slope = fit.is_null() ? "n/a" : fmt("%.4f", fit.at("slope").get<double>());
  const bool ok = pair.exit_code == 0 && low.at("phases") == 64 && escaping == 0 && positive;
  return {ok, "d<1: " + std::to_string(escaping) + "/64 Escaping; d>1: best growth slope " + slope +
                  (positive ? " (positive)" : " (not positive)")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  const fs::path live = work / "scenarios";
  const fs::path golden = work / "golden";
  fs::remove_all(work);
  fs::create_directories(work);

  report(1, "[f2] closed form vs quadrature", 5, criterion_f2);
  report(2, "[f1] large-I limit", 10, criterion_f1_limit);
  report(3, "[f1] derivative scaling", 30, criterion_f1_derivative);
  report(4, "beta exponent recovery", 60, criterion_beta);
  report(5, "oscillatory decay", 60, criterion_oscillatory);
  report(6, "integrator sanity", 60, criterion_integrator);

  // First pass over the catalog; criteria 7 to 9 read these runs and criterion 10 compares them with a rerun.
  std::map<std::string, RunResult> first;
  std::map<std::string, double> first_secs;
  auto run_one = [&](const std::string& name) {
    const auto start = std::chrono::steady_clock::now();
    first[name] = run_scenario(find_scenario(name), live / name);
    first_secs[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return first[name];
  };

  report(7, "regime reproduction", 600, [&] { return criterion_regimes(run_one("ding"), run_one("ll-bounded")); });
  report(8, "twist proxy", 300, [&] { return criterion_twist(run_one("twist")); });
  report(9, "critical pair", 900, [&] { return criterion_critical(run_one("critical-pair")); });

  // The rerun must reproduce every file byte for byte; it shares the budgets of the first pass.
  double rerun_budget = 600 + 300 + 900;
  for (const auto& s : list_scenarios())
    if (!first.count(s.name)) rerun_budget += 60;
  report(10, "determinism", rerun_budget, [&] {
    for (const auto& s : list_scenarios())
      if (!first.count(s.name)) run_one(s.name);
    fs::rename(live, golden);
    for (const auto& s : list_scenarios()) (void)run_scenario(s, live / s.name);
    const auto a = snapshot(golden), b = snapshot(live);
    std::size_t differing = 0;
    for (const auto& [path, bytes] : a) {
      const auto it = b.find(path);
      if (it == b.end() || it->second != bytes) ++differing;
    }
    for (const auto& [path, bytes] : b)
      if (!a.count(path)) ++differing;
    return Outcome{differing == 0 && !a.empty(), std::to_string(a.size()) + " files across " +
                                                      std::to_string(list_scenarios().size()) + " scenarios, " +
                                                      std::to_string(differing) + " differ"};
  });

  std::printf("SUMMARY: %d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
