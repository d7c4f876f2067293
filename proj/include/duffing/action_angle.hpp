#pragma once

// Action-angle coordinates for the linear part n(x^2 + y^2)/2, the Hamiltonian
// pieces f1, f2, f3, their angle averages and first-order generating functions.

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "duffing/decay_fit.hpp"
#include "duffing/function_model.hpp"

namespace duffing {

/// y is the scaled velocity x'/n.
struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// theta is a lift; it is not reduced modulo 2 pi / n.
struct ActionAngleState {
  double I = 0.0;
  double theta = 0.0;
  double t = 0.0;
};

/// I = n (x^2 + y^2) / 2, theta = atan2(y, x) / n in [0, 2 pi / n).
ActionAngleState to_action_angle(const PhaseState& s, int n);
PhaseState from_action_angle(const ActionAngleState& a, int n);

struct HamiltonianPieces {
  double f1 = 0.0;  // G(x) / n
  double f2 = 0.0;  // -x p(t) / n
  double f3 = 0.0;  // psi(x) / n
};

HamiltonianPieces hamiltonian_pieces(const DuffingSystem& system, double I, double theta, double t);

/// n (x^2 + y^2) / 2 + (G(x) - x p(t) + psi(x)) / n.
double hamiltonian(const DuffingSystem& system, const PhaseState& s);

/// Angle mean [f1](I). Throws PrecisionFailure if the trapezoid rule does not settle.
double avg_f1(const DuffingSystem& system, double I);

/// Central difference of avg_f1 with relative step 1e-4.
double avg_f1_derivative(const DuffingSystem& system, double I);

/// Asymptotic level (sqrt 2 / pi) n^-3/2 (g(+inf) - g(-inf)) of I^-1/2 [f1].
double avg_f1_limit_constant(const DuffingSystem& system);

struct DerivativeScalingReport {
  DecayFit fit;
  std::vector<double> I;
  std::vector<double> derivative;
  double predicted_level = 0.0;  // (sqrt 2 / 2 pi) n^-3/2 (g(+inf) - g(-inf))
  double observed_level = 0.0;   // I^1/2 [f1]' at the largest grid point
  double level_relative_error = 0.0;
  bool slope_ok = false;
  bool level_ok = false;
};

/// Fit of log |[f1]'| against log I. Throws FitDegenerate when g(+inf) = g(-inf).
DerivativeScalingReport avg_f1_derivative_check(const DuffingSystem& system,
                                                const std::vector<double>& I_grid);

/// Closed form [f2](h, t) from the harmonic-n projections of p.
double avg_f2(const DuffingSystem& system, double h, double t);

/// (sqrt 2 / 2 pi) n^-3/2 h^1/2 A, the maximum of |[f2](h, .)|.
double avg_f2_bound(const DuffingSystem& system, double h);

struct EnergyTimeSolution {
  double R = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double bound = 0.0;  // C h^1/2
  bool within_bound = false;
};

/// Smallest h for which the fixed-point map for R is a contraction (floor 100).
double energy_time_floor(const DuffingSystem& system);

/// Solves R = (f1 + f2 + f3)(h - R, theta, t). Throws HTooSmall below the floor
/// and SolverFailure if the iteration does not settle.
EnergyTimeSolution solve_energy_time(const DuffingSystem& system, double h, double t, double theta);

/// S2(h, theta) = integral_0^theta (f1(h, s) - [f1](h)) ds.
double generating_S2(const DuffingSystem& system, double h, double theta);

/// S3(h, t, theta) = integral_0^theta (f2(h, s, t + s) - [f2](h, t)) ds.
double generating_S3(const DuffingSystem& system, double h, double t, double theta);

/// Closed-form bound C h^1/2 on |S2| from sup |g|.
double generating_S2_bound(const DuffingSystem& system, double h);

struct NormalFormReport {
  double h = 0.0;
  double s2_closure = 0.0;       // |S2(h, 2 pi)| / h^1/2
  double s3_closure = 0.0;       // max_t |S3(h, t, 2 pi)| / h^1/2
  double s2_cancellation = 0.0;  // max_theta |dS2/dtheta - (f1 - [f1])| / h^1/2
  double s3_cancellation = 0.0;  // max |dS3/dtheta - (f2 - [f2])| / h^1/2
  double s2_max = 0.0;           // max_theta |S2| / h^1/2
  double s2_bound = 0.0;         // C of generating_S2_bound
  bool ok = false;
};

/// Samples theta on a uniform grid and t on `t_samples` phases.
NormalFormReport normalform_check(const DuffingSystem& system, double h,
                                  std::size_t theta_samples = 64, std::size_t t_samples = 8);

nlohmann::json to_json(const NormalFormReport& report);
nlohmann::json to_json(const DerivativeScalingReport& report);

}  // namespace duffing
