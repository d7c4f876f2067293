#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "duffing/decay_fit.hpp"
#include "duffing/function_model.hpp"

namespace duffing {

enum class Parity { Cos, Sin };

/// (1/2pi) integral_0^2pi trig(a cos(n theta)) dtheta by the trapezoid rule.
/// Throws AmplitudeTooLarge for a > 1e7.
double circle_mean(double a, Parity parity, int n = 1);

/// Angle mean of psi(sqrt(2/n) h^1/2 cos(n theta)) / n, one harmonic at a time.
double psi_average(const DuffingSystem& system, double h);

/// Windowed-maximum envelope of |v| over geometric windows [x, w x), then a
/// log-log fit through (argmax x, max |v|). A trailing window cut short by the
/// end of the data is dropped when at least four full ones remain.
DecayFit decay_fit_envelope(const std::vector<std::pair<double, double>>& samples,
                            double window_factor);

struct PsiDecayReport {
  std::vector<std::pair<double, double>> samples;  // (h, psi_average)
  DecayFit fit;
};

PsiDecayReport psi_average_decay(const DuffingSystem& system, double h_min, double h_max,
                                 std::size_t points, double window_factor = 2.0);

struct EndpointRow {
  double a = 0.0;
  double half_modulus = 0.0;  // |integral_0^pi/2 exp(i a cos theta) dtheta|
  double full_value = 0.0;    // integral_0^pi cos(a cos theta) dtheta
  double prefactor = 0.0;     // half_modulus * a^1/2
};

struct EndpointReport {
  std::vector<EndpointRow> rows;
  DecayFit fit;
  double predicted_prefactor = 0.0;  // sqrt(pi / 2)
  double prefactor_mean = 0.0;
  double prefactor_cv = 0.0;
  double symmetry_residual = 0.0;  // max |integral_0^2pi - 2 integral_0^pi|
  bool slope_ok = false;
  bool cv_ok = false;
};

/// Stationary-point expansion check for the phase cos(theta). The half interval
/// [0, pi/2] isolates one stationary endpoint; the full [0, pi] integral equals
/// pi J0(a), whose zeros make its modulus unusable for a prefactor fit.
EndpointReport endpoint_expansion_check(const std::vector<double>& a_grid);

nlohmann::json to_json(const EndpointReport& report);

}  // namespace duffing
