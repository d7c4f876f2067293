#include "duffing/decay_fit.hpp"

#include <cmath>

#include "duffing/error.hpp"

namespace duffing {

DecayFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Validation, "fit needs paired samples");
  if (x.size() < 2) throw Error(ErrorKind::FitDegenerate, "fit needs at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) throw Error(ErrorKind::FitDegenerate, "abscissa must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) throw Error(ErrorKind::FitDegenerate, "abscissa must increase");
    if (!(std::abs(y[i]) > 0.0) || !std::isfinite(y[i]))
      throw Error(ErrorKind::FitDegenerate, "ordinate must be finite and nonzero");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  fit.n_points = n;
  fit.x_lo = x.front();
  fit.x_hi = x.back();
  return fit;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw Error(ErrorKind::Validation, "geometric grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> out(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

nlohmann::json to_json(const DecayFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"rms_residual", fit.rms_residual},
          {"n_points", fit.n_points},
          {"x_range", {fit.x_lo, fit.x_hi}}};
}

}  // namespace duffing
