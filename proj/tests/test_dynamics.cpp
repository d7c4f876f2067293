#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "duffing/dynamics.hpp"
#include "duffing/error.hpp"
#include "oracles.hpp"

using namespace duffing;
using std::numbers::pi;

namespace {

FunctionSpec cos_forcing(double amplitude, int harmonic) {
  std::vector<double> c(static_cast<std::size_t>(harmonic), 0.0);
  c.back() = amplitude;
  return FunctionSpec::trig_poly(2.0 * pi, c, {});
}

DuffingSystem linear(int n, FunctionSpec p = {}) {
  return DuffingSystem::make(n, FunctionSpec::constant(0.0), {}, std::move(p));
}

double dist(const PhaseState& a, const PhaseState& b) { return std::hypot(a.x - b.x, a.y - b.y); }
double norm(const PhaseState& a) { return std::max(1.0, std::hypot(a.x, a.y)); }

ErrorKind kind_of(const std::function<void()>& call) {
  try {
    call();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Validation;
}

}  // namespace

TEST_CASE("linear strobe is the identity") {
  oracle::Rng rng(43);
  for (int n : {1, 2, 4}) {
    const auto sys = linear(n);
    for (int i = 0; i < 10; ++i) {
      const PhaseState s{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), rng.uniform(0.0, 6.0)};
      const PhaseState out = strobe_map(sys, s, 1e-12);
      CHECK(dist(out, s) <= 1e-9 * norm(s));
      CHECK(out.t == doctest::Approx(s.t + 2.0 * pi).epsilon(1e-15));
    }
  }
}

TEST_CASE("resonant linear forcing matches the closed form at K = 50") {
  for (int n : {1, 2}) {
    const auto sys = linear(n, FunctionSpec::trig_poly(2.0 * pi, std::vector<double>(n, 0.0), [n] {
                              std::vector<double> s(static_cast<std::size_t>(n), 0.0);
                              s.back() = 1.0;
                              return s;
                            }()));
    const oracle::ResonantSolution exact{n, 0.0, 1.0, 0.0, 0.0};
    const double t = 2.0 * pi * 50.0;
    const PhaseState out = integrate(sys, {0.0, 0.0, 0.0}, t, 1e-12);
    CHECK(std::abs(out.x - exact.x(t)) <= 1e-6 * std::abs(exact.x(t)));
    CHECK(std::abs(n * out.y - exact.v(t)) <= 1e-6 * std::max(1.0, std::abs(exact.v(t))));
  }
}

TEST_CASE("autonomous energy is conserved") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, {});
  const PhaseState s0{5.0, 0.0, 0.0};
  const double E0 = autonomous_energy(sys, s0);
  IntegratorStats stats;
  PhaseState s = s0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    s = integrate(sys, s, s.t + 100.0, 1e-12, &stats);
    worst = std::max(worst, std::abs(autonomous_energy(sys, s) - E0) / E0);
  }
  CHECK(s.t == doctest::Approx(1e4));
  CHECK(worst < 1e-8);
  CHECK(stats.steps > 0);

  const auto two = DuffingSystem::make(2, FunctionSpec::sum({FunctionSpec::arctan(), FunctionSpec::algebraic_tail(2.0, 2.0 / 3.0)}),
                                       {}, {});
  PhaseState q{30.0, -4.0, 0.0};
  const double Eq = autonomous_energy(two, q);
  for (int k = 0; k < 20; ++k) q = strobe_map(two, q, 1e-12);
  CHECK(std::abs(autonomous_energy(two, q) - Eq) / Eq < 1e-8);
}

TEST_CASE("strobe semigroup and reversibility") {
  const double tol = 1e-10;
  const std::vector<DuffingSystem> systems{
      DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(4.0, 1)),
      DuffingSystem::make(1, FunctionSpec::arctan(), FunctionSpec::trig_poly(2.0 * pi, {}, {1.0}), cos_forcing(1.0, 1)),
      DuffingSystem::make(2, FunctionSpec::arctan(), {}, cos_forcing(2.0, 2)),
  };
  oracle::Rng rng(47);
  for (const auto& sys : systems) {
    for (int i = 0; i < 5; ++i) {
      const PhaseState s{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), rng.uniform(0.0, 6.0)};
      const PhaseState twice = strobe_map(sys, strobe_map(sys, s, tol), tol);
      const PhaseState direct = integrate(sys, s, s.t + 4.0 * pi, tol);
      CHECK(dist(twice, direct) <= 2.0 * tol * norm(s) * 10.0);

      const PhaseState there = integrate(sys, s, s.t + 20.0, tol);
      const PhaseState back = integrate(sys, there, s.t, tol);
      CHECK(dist(back, s) <= 10.0 * tol * norm(s) * 10.0);
    }
  }
}

TEST_CASE("time translation equivariance") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), FunctionSpec::trig_poly(3.0, {0.5}, {}),
                                       FunctionSpec::trig_poly(2.0 * pi, {1.0, 0.3}, {0.2}));
  oracle::Rng rng(53);
  const double tol = 1e-11;
  for (int i = 0; i < 10; ++i) {
    const double t0 = rng.uniform(0.0, 50.0);
    const PhaseState s{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), t0};
    const PhaseState a = integrate(sys, s, t0 + 2.0 * pi, tol);
    const PhaseState b = integrate(sys.time_shifted(t0), {s.x, s.y, 0.0}, 2.0 * pi, tol);
    CHECK(dist(a, b) <= 10.0 * tol * norm(s) * 10.0);
  }
}

TEST_CASE("orbit records") {
  const auto sys = linear(2);
  const auto rec = orbit(sys, {3.0, 1.0, 0.0}, 100, 1e-12, "linear-2");
  REQUIRE(rec.iterates.size() == 101);
  CHECK(rec.system_id == "linear-2");
  for (std::size_t k = 0; k < rec.iterates.size(); ++k) {
    CHECK(rec.iterates[k].k == k);
    CHECK(std::abs(rec.iterates[k].I - rec.iterates[0].I) <= 1e-9 * rec.iterates[0].I);
  }
  CHECK(rotation_number(rec) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_FALSE(rec.hit_ceiling);
  CHECK(rec.integrator_stats.steps > 0);

  const auto v = classify_orbit(rec);
  CHECK(v.verdict == Verdict::BoundedEvidence);
  CHECK(v.max_I / v.min_I == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(kind_of([&] { (void)orbit(sys, {1.0, 0.0, 0.0}, 0, 1e-10); }) == ErrorKind::Validation);
  const auto short_rec = orbit(sys, {1.0, 0.0, 0.0}, 20, 1e-10);
  CHECK(kind_of([&] { (void)rotation_number(short_rec); }) == ErrorKind::NotApplicable);
}

TEST_CASE("property: linear rotation number is n for any action") {
  oracle::Rng rng(59);
  for (int n : {1, 3}) {
    for (int i = 0; i < 4; ++i) {
      const double I0 = rng.log_uniform(1e-2, 1e6);
      const double x0 = std::sqrt(2.0 * I0 / n);
      const auto rec = orbit(linear(n), {x0, 0.0, 0.0}, 60, 1e-12);
      CHECK(std::abs(rotation_number(rec) - n) <= 1e-9);
    }
  }
}

TEST_CASE("rotation number of the autonomous arctan system") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, {});
  const double I0 = 1e6;
  const double x0 = std::sqrt(2.0 * I0);
  const double T = oracle::period(
      1, [](double x) { return x * std::atan(x) - 0.5 * std::log1p(x * x); }, [](double x) { return std::atan(x); }, x0);
  const double omega_oracle = 2.0 * pi / T;
  CHECK(std::abs((omega_oracle - 1.0) * std::sqrt(I0) / (std::sqrt(2.0) / 2.0) - 1.0) <= 0.2);

  const auto rec = orbit(sys, {x0, 0.0, 0.0}, 200, 1e-12);
  const double omega = rotation_number(rec);
  CHECK(std::abs(omega - omega_oracle) <= 0.02 * (omega_oracle - 1.0));
  CHECK(std::abs((omega - 1.0) * std::sqrt(I0) / (std::sqrt(2.0) / 2.0) - 1.0) <= 0.2);

  // Halving the record changes the estimate by less than 2 pi / N.
  OrbitRecord half = rec;
  half.iterates.resize(101);
  CHECK(std::abs(rotation_number(half) - omega) <= 2.0 * pi / 100.0);
}

TEST_CASE("rotation number is undefined after escape") {
  OrbitRecord rec;
  rec.hit_ceiling = true;
  rec.iterates.resize(100);
  CHECK(kind_of([&] { (void)rotation_number(rec); }) == ErrorKind::NotApplicable);
}

TEST_CASE("twist scaling") {
  const auto grid = geometric_grid(1e3, 1e6, 8);
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(1.0, 1));
  const auto rep = twist_scaling_check(sys, grid, 1e-12, 100);
  CHECK(rep.sign_ok);
  CHECK(std::abs(rep.fit.slope + 0.5) <= 0.1);
  CHECK(rep.slope_ok);
  for (double w : rep.omega) CHECK(w > 1.0);

  const auto mirrored = DuffingSystem::make(1, FunctionSpec::arctan(-1.0), {}, {});
  const auto neg = twist_scaling_check(mirrored, grid, 1e-12, 100);
  CHECK(neg.sign_ok);
  for (double w : neg.omega) CHECK(w < 1.0);

  const auto even = DuffingSystem::make(1, FunctionSpec::algebraic_tail(1.0, 1.5), {}, {});
  CHECK(kind_of([&] { (void)twist_scaling_check(even, grid, 1e-12); }) == ErrorKind::FitDegenerate);
  CHECK(kind_of([&] { (void)twist_scaling_check(sys, geometric_grid(1e3, 1e5, 8), 1e-12); }) ==
        ErrorKind::Validation);
}

TEST_CASE("Ding system escapes with quadratic action growth") {
  const auto ding = DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(4.0, 1));
  const auto rec = orbit(ding, {std::sqrt(50.0), 0.0, 0.0}, 500, 1e-10);
  const auto v = classify_orbit(rec);
  CHECK(v.verdict == Verdict::Escaping);
  CHECK(v.max_I >= 4.0 * 25.0);
  REQUIRE(v.growth_fit.has_value());
  CHECK(std::abs(v.growth_fit->slope - 2.0) <= 0.4);
  CHECK(v.horizon_strobes == 500);
}

TEST_CASE("below threshold the orbit stays confined") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(1.0, 1));
  const auto rec = orbit(sys, {std::sqrt(200.0), 0.0, 0.0}, 2000, 1e-10);
  const auto v = classify_orbit(rec);
  CHECK(v.max_I <= 3.0 * 100.0);
  CHECK(v.verdict == Verdict::BoundedEvidence);
}

TEST_CASE("classification thresholds") {
  auto record = [](const std::vector<double>& I, bool ceiling = false) {
    OrbitRecord rec;
    for (std::size_t k = 0; k < I.size(); ++k) rec.iterates.push_back({k, 2.0 * pi * k, 0.0, 0.0, I[k], 0.0});
    rec.hit_ceiling = ceiling;
    return rec;
  };
  std::vector<double> growing, wobble;
  for (int k = 0; k < 40; ++k) {
    growing.push_back(10.0 * (1.0 + 0.2 * k * k));
    wobble.push_back(10.0 * (1.0 + 0.5 * std::sin(k)));
  }
  CHECK(classify_orbit(record(growing)).verdict == Verdict::Escaping);
  CHECK(classify_orbit(record(wobble)).verdict == Verdict::BoundedEvidence);
  // Large but shrinking at the end: neither verdict holds.
  std::vector<double> spike = wobble;
  spike[5] = 500.0;
  CHECK(classify_orbit(record(spike)).verdict == Verdict::Undecided);
  // Custom factors.
  CHECK(classify_orbit(record(wobble), 1.2, 1.2).verdict == Verdict::Undecided);
  // A ceiling hit with few iterates still escapes.
  CHECK(classify_orbit(record({10.0, 1e3, 2e12}, true)).verdict == Verdict::Escaping);
}

TEST_CASE("sweeps are ordered and deterministic") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(1.0, 1));
  std::vector<PhaseState> grid;
  for (double I0 : geometric_grid(50.0, 500.0, 6)) grid.push_back({std::sqrt(2.0 * I0), 0.0, 0.0});
  grid.push_back({0.0, 0.0, 0.0});  // the origin is a legitimate initial state
  const auto a = sweep(sys, grid, 200, 1e-10, 3);
  const auto b = sweep(sys, grid, 200, 1e-10, 1);
  REQUIRE(a.size() == grid.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].verdict.has_value() == b[i].verdict.has_value());
    if (!a[i].verdict) continue;
    CHECK(a[i].verdict->I0 == doctest::Approx(0.5 * (grid[i].x * grid[i].x)).epsilon(1e-14));
    CHECK(to_json(*a[i].verdict) == to_json(*b[i].verdict));
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(a[i].verdict->verdict == Verdict::BoundedEvidence);

  const auto lin = sweep(linear(1), {{1.0, 2.0, 0.0}, {-5.0, 0.5, 1.0}, {100.0, 0.0, 3.0}}, 100, 1e-11);
  for (const auto& e : lin) CHECK(e.verdict->verdict == Verdict::BoundedEvidence);

  CHECK_THROWS_AS(sweep(sys, {}, 10, 1e-10), Error);
}

TEST_CASE("sweep records per-orbit failures in place") {
  const auto sys = DuffingSystem::make(1, FunctionSpec::arctan(), {}, cos_forcing(1.0, 1));
  const auto out = sweep(sys, {{1.0, 0.0, 0.0}, {std::nan(""), 0.0, 0.0}}, 5, 1e-10);
  CHECK(out[0].verdict.has_value());
  CHECK_FALSE(out[1].verdict.has_value());
  CHECK_FALSE(out[1].error.empty());
}

TEST_CASE("escape scan of the linear system finds nothing") {
  const auto rep = critical_escape_scan(linear(1), 100.0, 32, 60, 1e-11);
  CHECK(rep.phases == 32);
  CHECK(rep.entries.size() == 32);
  CHECK(rep.bounded == 32);
  CHECK(rep.escaping == 0);
  const auto j = to_json(rep);
  CHECK(j.at("entries").size() == 32);
  CHECK_THROWS_AS(critical_escape_scan(linear(1), 100.0, 0, 10, 1e-10), Error);
}

TEST_CASE("parallel_for propagates exceptions") {
  std::vector<int> seen(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { seen[i] = 1; });
  for (int s : seen) CHECK(s == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(ErrorKind::SolverFailure, "boom");
                  }),
                  Error);
}
