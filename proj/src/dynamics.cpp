#include "duffing/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "duffing/error.hpp"

namespace duffing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double action(int n, double x, double y) { return 0.5 * static_cast<double>(n) * (x * x + y * y); }

// Branch of the raw increment nearest to the expected advance.
double nearest_branch(double raw, double expected) {
  return expected + std::remainder(raw - expected, kTwoPi);
}

}  // namespace

Rhs2 duffing_rhs(const DuffingSystem& system) {
  const double nn = static_cast<double>(system.n());
  const bool forced = !is_identically_zero(FunctionSpec(system.p()));
  const bool oscillating = system.has_psi();
  return [&system, nn, forced, oscillating](double t, const Vec2& s) -> Vec2 {
    double force = eval(system.g(), s[0]);
    if (oscillating) force += eval(system.psi_prime(), s[0]);
    if (forced) force -= eval(system.p(), t);
    return {nn * s[1], -nn * s[0] - force / nn};
  };
}

double autonomous_energy(const DuffingSystem& system, const PhaseState& s) {
  const double nn = static_cast<double>(system.n());
  return 0.5 * nn * nn * (s.x * s.x + s.y * s.y) + eval(system.G(), s.x);
}

PhaseState integrate(const DuffingSystem& system, const PhaseState& s0, double t1, double tol,
                     IntegratorStats* stats) {
  Dop853 stepper(tol);
  const Vec2 y = stepper.advance(duffing_rhs(system), s0.t, {s0.x, s0.y}, t1);
  if (stats) stats->merge(stepper.stats());
  return {y[0], y[1], t1};
}

PhaseState strobe_map(const DuffingSystem& system, const PhaseState& s, double tol,
                      IntegratorStats* stats) {
  return integrate(system, s, s.t + kTwoPi, tol, stats);
}

OrbitRecord orbit(const DuffingSystem& system, const PhaseState& s0, std::size_t N, double tol,
                  std::string system_id) {
  if (N < 1) throw Error(ErrorKind::Validation, "orbit needs N >= 1");
  const int n = system.n();
  const std::size_t M = std::max<std::size_t>(8, 4 * static_cast<std::size_t>(n));
  const double expected = kTwoPi * static_cast<double>(n) / static_cast<double>(M);
  const Rhs2 f = duffing_rhs(system);
  Dop853 stepper(tol);

  OrbitRecord rec;
  rec.system_id = std::move(system_id);
  rec.initial = s0;
  rec.iterates.reserve(N + 1);
  double theta = std::atan2(-s0.y, s0.x);
  rec.iterates.push_back({0, s0.t, s0.x, s0.y, action(n, s0.x, s0.y), theta});

  Vec2 y = {s0.x, s0.y};
  double prev_angle = theta;
  for (std::size_t k = 1; k <= N; ++k) {
    for (std::size_t j = 1; j <= M; ++j) {
      const double ta = s0.t + kTwoPi * (static_cast<double>(k - 1) +
                                         static_cast<double>(j - 1) / static_cast<double>(M));
      const double tb = j == M ? s0.t + kTwoPi * static_cast<double>(k)
                               : s0.t + kTwoPi * (static_cast<double>(k - 1) +
                                                  static_cast<double>(j) / static_cast<double>(M));
      y = stepper.advance(f, ta, y, tb);
      const double angle = std::atan2(-y[1], y[0]);
      theta += nearest_branch(angle - prev_angle, expected);
      prev_angle = angle;
    }
    const double I = action(n, y[0], y[1]);
    rec.iterates.push_back({k, s0.t + kTwoPi * static_cast<double>(k), y[0], y[1], I, theta});
    if (I > kActionCeiling) {
      rec.hit_ceiling = true;
      break;
    }
  }
  rec.integrator_stats = stepper.stats();
  return rec;
}

double rotation_number(const OrbitRecord& rec) {
  if (rec.hit_ceiling) throw Error(ErrorKind::NotApplicable, "orbit escaped; no rotation number");
  if (rec.iterates.size() < 51)
    throw Error(ErrorKind::NotApplicable, "rotation number needs >= 50 iterates");
  const auto& first = rec.iterates.front();
  const auto& last = rec.iterates.back();
  const double N = static_cast<double>(last.k - first.k);
  return (last.theta_lift - first.theta_lift) / (kTwoPi * N);
}

TwistReport twist_scaling_check(const DuffingSystem& system, const std::vector<double>& I_grid,
                                double tol, std::size_t strobes) {
  if (system.delta_g() == 0.0)
    throw Error(ErrorKind::FitDegenerate, "g(+inf) = g(-inf): no twist to measure");
  if (I_grid.size() < 8) throw Error(ErrorKind::Validation, "twist check needs >= 8 actions");
  if (I_grid.back() / I_grid.front() < 1e3)
    throw Error(ErrorKind::Validation, "twist check needs >= 3 decades of action");
  const DuffingSystem flat = system.autonomous();
  const double nn = static_cast<double>(system.n());
  TwistReport rep;
  rep.I = I_grid;
  rep.omega.assign(I_grid.size(), 0.0);
  parallel_for(I_grid.size(), 0, [&](std::size_t i) {
    const PhaseState s0{std::sqrt(2.0 * I_grid[i] / nn), 0.0, 0.0};
    rep.omega[i] = rotation_number(orbit(flat, s0, strobes, tol));
  });
  std::vector<double> excess;
  rep.sign_ok = true;
  const double sign = system.delta_g() > 0.0 ? 1.0 : -1.0;
  for (double w : rep.omega) {
    excess.push_back(w - nn);
    if (!((w - nn) * sign > 0.0)) rep.sign_ok = false;
  }
  rep.fit = fit_log_log(rep.I, excess);
  rep.slope_ok = std::abs(rep.fit.slope + 0.5) <= 0.1;
  return rep;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::BoundedEvidence: return "BoundedEvidence";
    case Verdict::Escaping: return "Escaping";
    case Verdict::Undecided: return "Undecided";
  }
  return "unknown";
}

ClassificationVerdict classify_orbit(const OrbitRecord& rec, double escape_factor,
                                     double confine_factor) {
  ClassificationVerdict v;
  if (rec.iterates.empty()) return v;
  v.I0 = rec.iterates.front().I;
  v.max_I = v.min_I = v.I0;
  for (const auto& p : rec.iterates) {
    v.max_I = std::max(v.max_I, p.I);
    v.min_I = std::min(v.min_I, p.I);
  }
  v.horizon_strobes = rec.iterates.back().k;

  const std::size_t total = rec.iterates.size();
  const std::size_t from = std::max<std::size_t>(1, total / 2);
  if (total - from >= 8) {
    std::vector<double> t, I;
    const double t0 = rec.iterates.front().t;
    for (std::size_t i = from; i < total; ++i) {
      t.push_back(rec.iterates[i].t - t0);
      I.push_back(rec.iterates[i].I);
    }
    v.growth_fit = fit_log_log(t, I);
  }

  const bool grows = rec.hit_ceiling || (v.growth_fit && v.growth_fit->slope > 0.0);
  if (v.max_I >= escape_factor * v.I0 && grows)
    v.verdict = Verdict::Escaping;
  else if (v.max_I <= confine_factor * v.I0 && !rec.hit_ceiling)
    v.verdict = Verdict::BoundedEvidence;
  else
    v.verdict = Verdict::Undecided;
  return v;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : failures)
    if (e) std::rethrow_exception(e);
}

std::vector<SweepEntry> sweep(const DuffingSystem& system, const std::vector<PhaseState>& initial,
                              std::size_t N, double tol, std::size_t workers) {
  if (initial.empty()) throw Error(ErrorKind::Validation, "sweep needs at least one initial state");
  std::vector<SweepEntry> out(initial.size());
  parallel_for(initial.size(), workers, [&](std::size_t i) {
    try {
      out[i].verdict = classify_orbit(orbit(system, initial[i], N, tol));
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

EscapeScanReport critical_escape_scan(const DuffingSystem& system, double I0, std::size_t phases,
                                      std::size_t N, double tol, std::size_t workers) {
  if (phases < 1) throw Error(ErrorKind::Validation, "escape scan needs phases >= 1");
  EscapeScanReport rep;
  rep.I0 = I0;
  rep.phases = phases;
  const double x0 = std::sqrt(2.0 * I0 / static_cast<double>(system.n()));
  std::vector<PhaseState> initial;
  for (std::size_t k = 0; k < phases; ++k)
    initial.push_back({x0, 0.0, kTwoPi * static_cast<double>(k) / static_cast<double>(phases)});
  rep.entries = sweep(system, initial, N, tol, workers);

  double best = -1.0;
  for (std::size_t k = 0; k < phases; ++k) {
    const auto& e = rep.entries[k];
    if (!e.verdict) continue;
    switch (e.verdict->verdict) {
      case Verdict::Escaping: ++rep.escaping; break;
      case Verdict::BoundedEvidence: ++rep.bounded; break;
      case Verdict::Undecided: ++rep.undecided; break;
    }
    if (e.verdict->max_I > best) {
      best = e.verdict->max_I;
      rep.best_phase = k;
      rep.best_t0 = initial[k].t;
      rep.best = *e.verdict;
    }
  }
  rep.best_has_positive_growth = rep.best.growth_fit && rep.best.growth_fit->slope > 0.0;
  return rep;
}

nlohmann::json to_json(const ClassificationVerdict& v) {
  nlohmann::json j = {{"verdict", std::string(to_string(v.verdict))},
                      {"I0", v.I0},
                      {"max_I", v.max_I},
                      {"min_I", v.min_I},
                      {"horizon_strobes", v.horizon_strobes}};
  j["growth_fit"] = v.growth_fit ? to_json(*v.growth_fit) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const EscapeScanReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t k = 0; k < r.entries.size(); ++k) {
    const auto& e = r.entries[k];
    nlohmann::json row = {{"phase", k}};
    if (e.verdict)
      row["verdict"] = to_json(*e.verdict);
    else
      row["error"] = e.error;
    entries.push_back(row);
  }
  return {{"I0", r.I0},
          {"phases", r.phases},
          {"escaping", r.escaping},
          {"bounded", r.bounded},
          {"undecided", r.undecided},
          {"best_phase", r.best_phase},
          {"best_t0", r.best_t0},
          {"best", to_json(r.best)},
          {"best_has_positive_growth", r.best_has_positive_growth},
          {"entries", entries}};
}

nlohmann::json to_json(const TwistReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.I.size(); ++i) rows.push_back({{"I", r.I[i]}, {"omega", r.omega[i]}});
  return {{"fit", to_json(r.fit)}, {"sign_ok", r.sign_ok}, {"slope_ok", r.slope_ok}, {"rows", rows}};
}

}  // namespace duffing
