#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace duffing {

/// Least-squares line through (log x, log |y|). Residual is RMS in natural-log units.
struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t n_points = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;
};

/// Requires >= 2 points, x > 0 strictly increasing, y != 0 (FitDegenerate otherwise).
DecayFit fit_log_log(std::span<const double> x, std::span<const double> y);

/// points values from lo to hi, equally spaced in log.
std::vector<double> geometric_grid(double lo, double hi, std::size_t points);

nlohmann::json to_json(const DecayFit& fit);

}  // namespace duffing
