#include "duffing/resonance_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duffing/action_angle.hpp"
#include "duffing/error.hpp"
#include "duffing/quadrature.hpp"

namespace duffing {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::StrictlyBelow: return "StrictlyBelow";
    case Regime::StrictlyAbove: return "StrictlyAbove";
    case Regime::Critical: return "Critical";
  }
  return "unknown";
}

std::string_view to_string(Prediction p) {
  switch (p) {
    case Prediction::Bounded: return "Bounded";
    case Prediction::Unbounded: return "Unbounded";
    case Prediction::CriticalNeedsD: return "CriticalNeedsD";
    case Prediction::OutOfTheory: return "OutOfTheory";
  }
  return "unknown";
}

ConditionReport lazer_leach_report(const DuffingSystem& system) {
  const int n = system.n();
  const auto [a, b] = system.forcing_harmonic(n);
  ConditionReport rep;
  rep.lhs_A = kPi * std::hypot(a, b);
  rep.rhs_B = 2.0 * std::abs(system.delta_g());

  const fn::TrigPoly& p = system.p();
  const double nn = static_cast<double>(n);
  const double tol = 1e-13 * std::max(1.0, sup_bound(FunctionSpec(p)));
  const auto re = quad::gauss_kronrod([&](double t) { return eval(p, t) * std::cos(nn * t); }, 0.0,
                                      2.0 * kPi, tol, 1e-14);
  const auto im = quad::gauss_kronrod([&](double t) { return eval(p, t) * std::sin(nn * t); }, 0.0,
                                      2.0 * kPi, tol, 1e-14);
  rep.quadrature_A = std::hypot(re.value, im.value);
  if (std::abs(rep.quadrature_A - rep.lhs_A) > 1e-10 * std::max(1.0, rep.lhs_A))
    throw Error(ErrorKind::PrecisionFailure, "closed-form A disagrees with quadrature");

  const double scale = std::max({rep.lhs_A, rep.rhs_B, 1.0});
  rep.relative_gap = (rep.lhs_A - rep.rhs_B) / std::max({rep.lhs_A, rep.rhs_B, 1e-300});
  if (std::abs(rep.lhs_A - rep.rhs_B) <= kCriticalTolerance * scale) {
    rep.regime = Regime::Critical;
    rep.predicted = Prediction::CriticalNeedsD;
  } else if (rep.lhs_A < rep.rhs_B) {
    rep.regime = Regime::StrictlyBelow;
    rep.predicted = Prediction::Bounded;
  } else {
    rep.regime = Regime::StrictlyAbove;
    rep.predicted = Prediction::Unbounded;
  }
  return rep;
}

double beta_constant(const DuffingSystem& system) {
  // [f1] of L ln|x| + K+- over the circle of radius rho is
  // (L (ln rho - ln 2) + (K+ + K-) / 2) / n; the L ln rho piece is kept in beta_tail.
  const FarField ff = far_field(system.G());
  const double nn = static_cast<double>(system.n());
  return (0.5 * (ff.offset_plus + ff.offset_minus) - ff.log_coefficient * std::numbers::ln2) / nn;
}

std::vector<BetaSample> beta_profile(const DuffingSystem& system, const std::vector<double>& h_grid) {
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] >= 100.0)) throw Error(ErrorKind::Validation, "beta_profile needs h >= 100");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1]))
      throw Error(ErrorKind::Validation, "beta_profile grid must increase");
  }
  const double nn = static_cast<double>(system.n());
  const double lead = std::numbers::sqrt2 / kPi * std::pow(nn, -1.5) * std::abs(system.delta_g());
  const double constant = beta_constant(system);
  std::vector<BetaSample> out;
  out.reserve(h_grid.size());
  for (double h : h_grid) {
    BetaSample s;
    s.h = h;
    s.beta = avg_f1(system, h) - lead * std::sqrt(h);
    s.beta_tail = s.beta - constant;
    if (!std::isfinite(s.beta))
      throw Error(ErrorKind::PrecisionFailure, "beta not finite at h=" + std::to_string(h));
    out.push_back(s);
  }
  return out;
}

CriticalDEstimate critical_d_estimate(const DuffingSystem& system, double h_min, double h_max,
                                      std::size_t points) {
  if (points < 8) throw Error(ErrorKind::Validation, "critical_d_estimate needs >= 8 points");
  if (!(h_min > 0.0) || !(h_max / h_min >= 1e4))
    throw Error(ErrorKind::Validation, "critical_d_estimate needs h_max / h_min >= 1e4");
  CriticalDEstimate est;
  est.samples = beta_profile(system, geometric_grid(h_min, h_max, points));
  std::vector<double> h, tail;
  for (const auto& s : est.samples) {
    h.push_back(s.h);
    tail.push_back(s.beta_tail);
  }
  const double sign = tail.front() > 0.0 ? 1.0 : -1.0;
  for (double v : tail)
    if (!(v * sign > 0.0))
      throw Error(ErrorKind::FitDegenerate, "beta tail changes sign inside the fit window");
  est.fit = fit_log_log(h, tail);
  est.implied_d = 1.0 - 2.0 * est.fit.slope;
  return est;
}

Prediction classify_theorem(const DuffingSystem& system,
                            const std::optional<CriticalDEstimate>& d_fit) {
  const ConditionReport rep = lazer_leach_report(system);
  if (rep.regime != Regime::Critical) return rep.predicted;
  if (!d_fit) return Prediction::CriticalNeedsD;
  const double d = d_fit->implied_d;
  if (d < 1.0 - kDMargin) return Prediction::Bounded;
  if (d > 1.0 + kDMargin) return Prediction::Unbounded;
  return Prediction::OutOfTheory;
}

nlohmann::json to_json(const ConditionReport& r) {
  return {{"lhs_A", r.lhs_A},
          {"rhs_B", r.rhs_B},
          {"regime", std::string(to_string(r.regime))},
          {"relative_gap", r.relative_gap},
          {"predicted", std::string(to_string(r.predicted))}};
}

nlohmann::json to_json(const CriticalDEstimate& e) {
  return {{"slope", e.fit.slope},
          {"intercept", e.fit.intercept},
          {"rms_residual", e.fit.rms_residual},
          {"implied_d", e.implied_d},
          {"n_points", e.fit.n_points},
          {"x_range", {e.fit.x_lo, e.fit.x_hi}}};
}

}  // namespace duffing
