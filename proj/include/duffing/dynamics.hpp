#pragma once

// Long-horizon integration, the time-2pi strobe map and orbit classification.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "duffing/action_angle.hpp"
#include "duffing/decay_fit.hpp"
#include "duffing/function_model.hpp"
#include "duffing/integrator.hpp"

namespace duffing {

inline constexpr double kActionCeiling = 1e12;
inline constexpr double kEscapeFactor = 4.0;
inline constexpr double kConfineFactor = 3.0;

/// Right-hand side x' = n y, y' = -n x - (g(x) + psi'(x) - p(t)) / n.
Rhs2 duffing_rhs(const DuffingSystem& system);

/// n^2 x^2 / 2 + (n y)^2 / 2 + G(x); conserved when p = psi = 0.
double autonomous_energy(const DuffingSystem& system, const PhaseState& s);

PhaseState integrate(const DuffingSystem& system, const PhaseState& s0, double t1, double tol,
                     IntegratorStats* stats = nullptr);

/// One forcing period.
PhaseState strobe_map(const DuffingSystem& system, const PhaseState& s, double tol,
                      IntegratorStats* stats = nullptr);

struct OrbitPoint {
  std::size_t k = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double I = 0.0;
  double theta_lift = 0.0;  // unwrapped angle of (x, -y): the direction of motion
};

struct OrbitRecord {
  std::string system_id;
  PhaseState initial;
  std::vector<OrbitPoint> iterates;
  IntegratorStats integrator_stats;
  bool hit_ceiling = false;
};

/// N strobe iterates after the initial point. The angle is tracked on
/// max(8, 4 n) sub-samples per period so that every increment is below pi.
/// Stops early once I exceeds the 1e12 ceiling.
OrbitRecord orbit(const DuffingSystem& system, const PhaseState& s0, std::size_t N, double tol,
                  std::string system_id = "");

/// (theta_N - theta_0) / (2 pi N). Throws NotApplicable on escaped or short records.
double rotation_number(const OrbitRecord& rec);

struct TwistReport {
  std::vector<double> I;
  std::vector<double> omega;
  DecayFit fit;  // log |omega - n| against log I
  bool sign_ok = false;
  bool slope_ok = false;
};

/// Rotation numbers of the autonomous restriction launched at x = sqrt(2 I / n), y = 0.
/// Throws FitDegenerate when g(+inf) = g(-inf).
TwistReport twist_scaling_check(const DuffingSystem& system, const std::vector<double>& I_grid,
                                double tol, std::size_t strobes = 200);

enum class Verdict { BoundedEvidence, Escaping, Undecided };
std::string_view to_string(Verdict v);

struct ClassificationVerdict {
  Verdict verdict = Verdict::Undecided;
  double I0 = 0.0;
  double max_I = 0.0;
  double min_I = 0.0;
  std::optional<DecayFit> growth_fit;  // log I against log t over the final half
  std::size_t horizon_strobes = 0;
};

ClassificationVerdict classify_orbit(const OrbitRecord& rec, double escape_factor = kEscapeFactor,
                                     double confine_factor = kConfineFactor);

struct SweepEntry {
  std::optional<ClassificationVerdict> verdict;
  std::string error;  // set when the orbit failed
};

/// Orbits run on a worker pool; results are merged by input index.
std::vector<SweepEntry> sweep(const DuffingSystem& system, const std::vector<PhaseState>& initial,
                              std::size_t N, double tol, std::size_t workers = 0);

struct EscapeScanReport {
  double I0 = 0.0;
  std::size_t phases = 0;
  std::vector<SweepEntry> entries;  // one per launch phase
  std::size_t best_phase = 0;
  double best_t0 = 0.0;
  ClassificationVerdict best;
  std::size_t escaping = 0;
  std::size_t bounded = 0;
  std::size_t undecided = 0;
  bool best_has_positive_growth = false;
};

/// Launches at (I0, theta = 0, t0 = 2 pi k / phases) and reports the orbit with the largest max I.
EscapeScanReport critical_escape_scan(const DuffingSystem& system, double I0, std::size_t phases,
                                      std::size_t N, double tol, std::size_t workers = 0);

/// Runs body(i) for i in [0, count) on up to `workers` threads (0: hardware concurrency).
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

nlohmann::json to_json(const ClassificationVerdict& v);
nlohmann::json to_json(const EscapeScanReport& r);
nlohmann::json to_json(const TwistReport& r);

}  // namespace duffing
