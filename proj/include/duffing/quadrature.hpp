#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace duffing::quad {

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  std::size_t nodes = 0;
  bool converged = false;
};

struct PeriodicOptions {
  double rel_tol = 1e-11;
  double abs_tol = 0.0;
  std::size_t min_nodes = 16;
  std::size_t max_nodes = std::size_t{1} << 22;
  /// f(phi) == f(-phi): only [0, pi] is sampled.
  bool even = false;
  /// Also f(phi) == f(pi - phi): only [0, pi / 2] is sampled. Implies even.
  bool quarter = false;
};

/// (1/2pi) * integral over [0, 2pi) of a 2pi-periodic f, trapezoid rule with node
/// doubling. Stops when successive estimates agree to
/// max(abs_tol, rel_tol * max(|mean|, mean |f|)).
template <class F>
Result periodic_mean(F&& f, const PeriodicOptions& opt) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  // Any multiple of 4 keeps the folded node sets aligned under doubling.
  std::size_t n = std::max<std::size_t>(4, (opt.min_nodes + 3) / 4 * 4);

  Result r;
  double sum = 0.0;      // sum over all n nodes
  double abs_sum = 0.0;  // sum of |f| over all n nodes
  if (opt.quarter) {
    const double f0 = f(0.0), fq = f(0.5 * std::numbers::pi);
    sum = 2.0 * (f0 + fq);
    abs_sum = 2.0 * (std::abs(f0) + std::abs(fq));
    r.evaluations += 2;
    for (std::size_t k = 1; k < n / 4; ++k) {
      const double v = f(two_pi * static_cast<double>(k) / static_cast<double>(n));
      sum += 4.0 * v;
      abs_sum += 4.0 * std::abs(v);
      ++r.evaluations;
    }
  } else if (opt.even) {
    const double f0 = f(0.0), fpi = f(std::numbers::pi);
    sum = f0 + fpi;
    abs_sum = std::abs(f0) + std::abs(fpi);
    r.evaluations += 2;
    for (std::size_t k = 1; k < n / 2; ++k) {
      const double v = f(two_pi * static_cast<double>(k) / static_cast<double>(n));
      sum += 2.0 * v;
      abs_sum += 2.0 * std::abs(v);
      ++r.evaluations;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = f(two_pi * static_cast<double>(k) / static_cast<double>(n));
      sum += v;
      abs_sum += std::abs(v);
      ++r.evaluations;
    }
  }
  double mean = sum / static_cast<double>(n);

  while (n < opt.max_nodes) {
    // New nodes sit at the midpoints (2j + 1) pi / n.
    double add = 0.0, add_abs = 0.0;
    const double step = two_pi / static_cast<double>(n);
    const std::size_t fold = opt.quarter ? 4 : opt.even ? 2 : 1;
    const std::size_t count = n / fold;
    for (std::size_t j = 0; j < count; ++j) {
      const double v = f((static_cast<double>(j) + 0.5) * step);
      add += v;
      add_abs += std::abs(v);
    }
    r.evaluations += count;
    add *= static_cast<double>(fold);
    add_abs *= static_cast<double>(fold);
    sum += add;
    abs_sum += add_abs;
    n *= 2;
    const double next = sum / static_cast<double>(n);
    const double scale = std::max(std::abs(next), abs_sum / static_cast<double>(n));
    const double diff = std::abs(next - mean);
    mean = next;
    if (diff <= std::max(opt.abs_tol, opt.rel_tol * scale)) {
      r.converged = true;
      r.error_estimate = diff;
      break;
    }
    r.error_estimate = diff;
  }
  r.value = mean;
  r.nodes = n;
  return r;
}

/// Adaptive Gauss-Kronrod (7/15) on [a, b].
Result gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, std::size_t max_intervals = 4000);

/// Fixed composite 15-point Kronrod rule over equal panels; no error control.
double kronrod_panels(const std::function<double(double)>& f, double a, double b,
                      std::size_t panels);

}  // namespace duffing::quad
