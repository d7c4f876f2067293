#include "duffing/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duffing/error.hpp"
#include "duffing/quadrature.hpp"

namespace duffing {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMaxAmplitude = 1e7;
}  // namespace

double circle_mean(double a, Parity parity, int n) {
  if (!(a >= 0.0)) throw Error(ErrorKind::Validation, "circle_mean needs a >= 0");
  if (a > kMaxAmplitude)
    throw Error(ErrorKind::AmplitudeTooLarge, "amplitude " + std::to_string(a) + " exceeds 1e7");
  if (n < 1) throw Error(ErrorKind::Validation, "circle_mean needs n >= 1");
  // phi = n theta maps the circle onto itself n times, so the mean does not depend on n.
  const auto nodes = static_cast<std::size_t>(std::ceil(16.0 * (1.0 + a)));
  quad::PeriodicOptions opt;
  opt.rel_tol = 0.0;
  opt.abs_tol = 1e-12;
  opt.min_nodes = nodes;
  opt.max_nodes = 4 * nodes;
  // Both integrands are even in phi; the cosine one is also symmetric about pi / 2.
  opt.even = true;
  quad::Result r;
  if (parity == Parity::Cos) {
    opt.quarter = true;
    r = quad::periodic_mean([a](double phi) { return std::cos(a * std::cos(phi)); }, opt);
  } else {
    r = quad::periodic_mean([a](double phi) { return std::sin(a * std::cos(phi)); }, opt);
  }
  if (!r.converged) throw Error(ErrorKind::PrecisionFailure, "circle_mean did not converge");
  return r.value;
}

double psi_average(const DuffingSystem& system, double h) {
  if (!(h >= 1.0)) throw Error(ErrorKind::Validation, "psi_average needs h >= 1");
  const fn::TrigPoly& psi = system.psi_poly();
  const int n = system.n();
  const double nn = static_cast<double>(n);
  const double radius = std::sqrt(2.0 / nn) * std::sqrt(h);
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.cos.size(); ++i) {
    if (psi.cos[i] == 0.0) continue;
    const double a = 2.0 * kPi * static_cast<double>(i + 1) / psi.period * radius;
    acc += psi.cos[i] * circle_mean(a, Parity::Cos, n);
  }
  return acc / nn;
}

DecayFit decay_fit_envelope(const std::vector<std::pair<double, double>>& samples,
                            double window_factor) {
  if (!(window_factor >= 2.0)) throw Error(ErrorKind::Validation, "window_factor must be >= 2");
  if (samples.size() < 8) throw Error(ErrorKind::Validation, "envelope fit needs >= 8 samples");
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front().first, hi = sorted.back().first;
  if (!(lo > 0.0) || hi / lo < 1e3)
    throw Error(ErrorKind::Validation, "envelope fit needs positive x spanning >= 3 decades");

  struct Window {
    double x = 0.0, v = -1.0, upper = 0.0;
  };
  std::vector<Window> windows;
  double start = lo;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double end = start * window_factor;
    Window w;
    w.upper = end;
    for (; i < sorted.size() && sorted[i].first < end; ++i) {
      const double v = std::abs(sorted[i].second);
      if (v > w.v) w = {sorted[i].first, v, end};
    }
    if (w.v > 0.0) windows.push_back(w);
    start = end;
  }
  if (windows.size() > 4 && windows.back().upper > hi * (1.0 + 1e-12)) windows.pop_back();
  if (windows.size() < 4)
    throw Error(ErrorKind::FitDegenerate, "fewer than four nonempty envelope windows");
  std::vector<double> x, v;
  for (const auto& w : windows) {
    x.push_back(w.x);
    v.push_back(w.v);
  }
  return fit_log_log(x, v);
}

PsiDecayReport psi_average_decay(const DuffingSystem& system, double h_min, double h_max,
                                 std::size_t points, double window_factor) {
  PsiDecayReport rep;
  for (double h : geometric_grid(h_min, h_max, points))
    rep.samples.emplace_back(h, psi_average(system, h));
  rep.fit = decay_fit_envelope(rep.samples, window_factor);
  return rep;
}

namespace {

std::size_t panels_for(double a, double length) {
  return static_cast<std::size_t>(a * length / kPi) + 64;
}

}  // namespace

EndpointReport endpoint_expansion_check(const std::vector<double>& a_grid) {
  if (a_grid.size() < 8) throw Error(ErrorKind::Validation, "endpoint check needs >= 8 points");
  EndpointReport rep;
  rep.predicted_prefactor = std::sqrt(kPi / 2.0);
  std::vector<double> as, mods;
  for (double a : a_grid) {
    if (!(a > 0.0)) throw Error(ErrorKind::Validation, "endpoint check needs a > 0");
    EndpointRow row;
    row.a = a;
    auto c = [a](double th) { return std::cos(a * std::cos(th)); };
    auto s = [a](double th) { return std::sin(a * std::cos(th)); };
    const std::size_t half_panels = panels_for(a, kPi / 2.0);
    const double re = quad::kronrod_panels(c, 0.0, kPi / 2.0, half_panels);
    const double im = quad::kronrod_panels(s, 0.0, kPi / 2.0, half_panels);
    row.half_modulus = std::hypot(re, im);
    row.full_value = quad::kronrod_panels(c, 0.0, kPi, panels_for(a, kPi));
    const double circle = quad::kronrod_panels(c, 0.0, 2.0 * kPi, panels_for(a, 2.0 * kPi));
    rep.symmetry_residual = std::max(rep.symmetry_residual, std::abs(circle - 2.0 * row.full_value));
    row.prefactor = row.half_modulus * std::sqrt(a);
    rep.rows.push_back(row);
    as.push_back(a);
    mods.push_back(row.half_modulus);
  }
  rep.fit = fit_log_log(as, mods);
  double sum = 0.0, sq = 0.0;
  for (const auto& r : rep.rows) sum += r.prefactor;
  rep.prefactor_mean = sum / static_cast<double>(rep.rows.size());
  for (const auto& r : rep.rows) sq += (r.prefactor - rep.prefactor_mean) * (r.prefactor - rep.prefactor_mean);
  rep.prefactor_cv = std::sqrt(sq / static_cast<double>(rep.rows.size())) / rep.prefactor_mean;
  rep.slope_ok = std::abs(rep.fit.slope + 0.5) <= 0.05;
  rep.cv_ok = rep.prefactor_cv <= 0.10;
  return rep;
}

nlohmann::json to_json(const EndpointReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"a", row.a},
                    {"half_modulus", row.half_modulus},
                    {"full_value", row.full_value},
                    {"prefactor", row.prefactor}});
  return {{"fit", to_json(r.fit)},
          {"predicted_prefactor", r.predicted_prefactor},
          {"prefactor_mean", r.prefactor_mean},
          {"prefactor_cv", r.prefactor_cv},
          {"symmetry_residual", r.symmetry_residual},
          {"slope_ok", r.slope_ok},
          {"cv_ok", r.cv_ok},
          {"rows", rows}};
}

}  // namespace duffing
