#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "duffing/decay_fit.hpp"
#include "duffing/function_model.hpp"

namespace duffing {

enum class Regime { StrictlyBelow, StrictlyAbove, Critical };
enum class Prediction { Bounded, Unbounded, CriticalNeedsD, OutOfTheory };

std::string_view to_string(Regime r);
std::string_view to_string(Prediction p);

inline constexpr double kCriticalTolerance = 1e-9;
inline constexpr double kDMargin = 0.05;

struct ConditionReport {
  double lhs_A = 0.0;  // |integral_0^2pi p(t) e^{i n t} dt|
  double rhs_B = 0.0;  // 2 |g(+inf) - g(-inf)|
  Regime regime = Regime::StrictlyBelow;
  double relative_gap = 0.0;
  Prediction predicted = Prediction::Bounded;
  double quadrature_A = 0.0;  // independent adaptive-quadrature value of A
};

/// Closed form A and B, A cross-checked by quadrature (PrecisionFailure beyond 1e-10 relative).
ConditionReport lazer_leach_report(const DuffingSystem& system);

struct BetaSample {
  double h = 0.0;
  double beta = 0.0;
  /// beta minus its structural large-h constant; this is the part that scales like h^((1-d)/2).
  double beta_tail = 0.0;
};

/// Constant that beta(h) approaches when the sub-linear part of G decays, read off
/// the far-field expansion G(x) = g(+-inf) x + L ln|x| + K+- + o(1).
double beta_constant(const DuffingSystem& system);

std::vector<BetaSample> beta_profile(const DuffingSystem& system, const std::vector<double>& h_grid);

struct CriticalDEstimate {
  DecayFit fit;
  double implied_d = 0.0;
  std::vector<BetaSample> samples;
};

/// Log-log fit of |beta_tail| on a geometric h grid; implied d = 1 - 2 slope.
/// Throws FitDegenerate if beta_tail changes sign or vanishes in the window.
CriticalDEstimate critical_d_estimate(const DuffingSystem& system, double h_min = 1e4,
                                      double h_max = 1e9, std::size_t points = 12);

Prediction classify_theorem(const DuffingSystem& system,
                            const std::optional<CriticalDEstimate>& d_fit);

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const CriticalDEstimate& estimate);

}  // namespace duffing
