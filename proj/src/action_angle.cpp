#include "duffing/action_angle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duffing/error.hpp"
#include "duffing/quadrature.hpp"

namespace duffing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDerivativeStep = 1e-4;
constexpr double kThetaStep = 1e-6;

double radius(int n, double I) { return std::sqrt(2.0 * I / static_cast<double>(n)); }

std::size_t nodes_for_radius(double rho) {
  std::size_t n = 16;
  while (static_cast<double>(n) < 4.0 * rho && n < (std::size_t{1} << 24)) n *= 2;
  return n;
}

double forcing_sup(const DuffingSystem& system) { return sup_bound(FunctionSpec(system.p())); }

double psi_sup(const DuffingSystem& system) { return sup_bound(FunctionSpec(system.psi_poly())); }

double psi_prime_sup(const DuffingSystem& system) { return sup_bound(system.psi_prime()); }

double lazer_leach_A(const DuffingSystem& system) {
  const auto [a, b] = system.forcing_harmonic(system.n());
  return kPi * std::hypot(a, b);
}

double f_total(const DuffingSystem& system, double I, double theta, double t) {
  const HamiltonianPieces f = hamiltonian_pieces(system, I, theta, t);
  return f.f1 + f.f2 + f.f3;
}

}  // namespace

ActionAngleState to_action_angle(const PhaseState& s, int n) {
  if (s.x == 0.0 && s.y == 0.0) throw Error(ErrorKind::DegenerateState, "origin has no angle");
  const double nn = static_cast<double>(n);
  double angle = std::atan2(s.y, s.x);
  if (angle < 0.0) angle += kTwoPi;
  if (angle >= kTwoPi) angle -= kTwoPi;
  return {0.5 * nn * (s.x * s.x + s.y * s.y), angle / nn, s.t};
}

PhaseState from_action_angle(const ActionAngleState& a, int n) {
  if (!(a.I > 0.0)) throw Error(ErrorKind::DegenerateState, "action must be positive");
  const double nn = static_cast<double>(n);
  const double r = radius(n, a.I);
  return {r * std::cos(nn * a.theta), r * std::sin(nn * a.theta), a.t};
}

HamiltonianPieces hamiltonian_pieces(const DuffingSystem& system, double I, double theta,
                                     double t) {
  const double nn = static_cast<double>(system.n());
  const double x = radius(system.n(), I) * std::cos(nn * theta);
  return {eval(system.G(), x) / nn, -x * eval(system.p(), t) / nn,
          eval(system.psi_poly(), x) / nn};
}

double hamiltonian(const DuffingSystem& system, const PhaseState& s) {
  const double nn = static_cast<double>(system.n());
  return 0.5 * nn * (s.x * s.x + s.y * s.y) +
         (eval(system.G(), s.x) - s.x * eval(system.p(), s.t) + eval(system.psi_poly(), s.x)) / nn;
}

double avg_f1(const DuffingSystem& system, double I) {
  if (!(I > 0.0)) throw Error(ErrorKind::DegenerateState, "avg_f1 needs I > 0");
  const double nn = static_cast<double>(system.n());
  const double rho = radius(system.n(), I);
  // Over a full period the substitution phi = n theta leaves the mean unchanged.
  quad::PeriodicOptions opt;
  opt.even = true;
  opt.min_nodes = nodes_for_radius(rho);
  opt.max_nodes = std::size_t{1} << 24;
  const FunctionSpec& G = system.G();
  const quad::Result r = quad::periodic_mean([&](double phi) { return eval(G, rho * std::cos(phi)); }, opt);
  if (!r.converged)
    throw Error(ErrorKind::PrecisionFailure,
                "avg_f1 did not converge at I=" + std::to_string(I) + " with " +
                    std::to_string(r.nodes) + " nodes");
  return r.value / nn;
}

double avg_f1_derivative(const DuffingSystem& system, double I) {
  const double step = kDerivativeStep * I;
  return (avg_f1(system, I + step) - avg_f1(system, I - step)) / (2.0 * step);
}

double avg_f1_limit_constant(const DuffingSystem& system) {
  const double nn = static_cast<double>(system.n());
  return std::numbers::sqrt2 / kPi * std::pow(nn, -1.5) * system.delta_g();
}

DerivativeScalingReport avg_f1_derivative_check(const DuffingSystem& system,
                                                const std::vector<double>& I_grid) {
  if (system.delta_g() == 0.0)
    throw Error(ErrorKind::FitDegenerate, "g(+inf) = g(-inf): [f1]' has no I^-1/2 law");
  if (I_grid.size() < 8) throw Error(ErrorKind::Validation, "derivative check needs >= 8 points");
  DerivativeScalingReport rep;
  rep.I = I_grid;
  rep.derivative.reserve(I_grid.size());
  for (double I : I_grid) rep.derivative.push_back(avg_f1_derivative(system, I));
  rep.fit = fit_log_log(rep.I, rep.derivative);
  rep.predicted_level = 0.5 * avg_f1_limit_constant(system);
  rep.observed_level = std::sqrt(I_grid.back()) * rep.derivative.back();
  rep.level_relative_error =
      std::abs(rep.observed_level - rep.predicted_level) / std::abs(rep.predicted_level);
  rep.slope_ok = std::abs(rep.fit.slope + 0.5) <= 0.05;
  rep.level_ok = rep.level_relative_error <= 0.05;
  return rep;
}

double avg_f2(const DuffingSystem& system, double h, double t) {
  const int n = system.n();
  const double nn = static_cast<double>(n);
  const auto [a, b] = system.forcing_harmonic(n);
  const double Cn = kPi * a;
  const double Sn = kPi * b;
  return -std::numbers::sqrt2 / kTwoPi * std::pow(nn, -1.5) * std::sqrt(h) *
         (std::cos(nn * t) * Cn + std::sin(nn * t) * Sn);
}

double avg_f2_bound(const DuffingSystem& system, double h) {
  const double nn = static_cast<double>(system.n());
  return std::numbers::sqrt2 / kTwoPi * std::pow(nn, -1.5) * std::sqrt(h) * lazer_leach_A(system);
}

double energy_time_floor(const DuffingSystem& system) {
  // |d/dI (f1 + f2 + f3)| <= S / (n sqrt(2 n I)); the map contracts by 1/2 once I >= 2 S^2 / n^3.
  const double nn = static_cast<double>(system.n());
  const double S = sup_bound(system.g()) + forcing_sup(system) + psi_prime_sup(system);
  return std::max(100.0, 2.0 * S * S / (nn * nn * nn));
}

EnergyTimeSolution solve_energy_time(const DuffingSystem& system, double h, double t,
                                     double theta) {
  const double floor = energy_time_floor(system);
  if (!(h >= floor))
    throw Error(ErrorKind::HTooSmall,
                "h=" + std::to_string(h) + " below contraction floor " + std::to_string(floor));
  const double nn = static_cast<double>(system.n());
  const double C = 2.0 * (sup_bound(system.g()) + forcing_sup(system) + psi_sup(system)) *
                   std::sqrt(2.0 / nn) / nn;
  const double stop = 1e-12 * std::max(1.0, std::sqrt(h));

  EnergyTimeSolution sol;
  sol.bound = C * std::sqrt(h);
  double R = 0.0;
  constexpr int kMaxIterations = 500;
  for (int k = 1; k <= kMaxIterations; ++k) {
    if (!(h - R > 0.0)) throw Error(ErrorKind::SolverFailure, "iterate left the region I > 0");
    const double next = f_total(system, h - R, theta, t);
    if (!std::isfinite(next)) throw Error(ErrorKind::SolverFailure, "iterate is not finite");
    const double delta = std::abs(next - R);
    R = next;
    sol.iterations = k;
    if (delta < stop) break;
    if (k == kMaxIterations)
      throw Error(ErrorKind::SolverFailure, "fixed point did not settle at h=" + std::to_string(h));
  }
  sol.R = R;
  sol.residual = std::abs(R - f_total(system, h - R, theta, t));
  sol.within_bound = std::abs(R) <= sol.bound;
  return sol;
}

namespace {

double s2_integral(const DuffingSystem& system, double h, double mean, double a, double b) {
  const double nn = static_cast<double>(system.n());
  const double rho = radius(system.n(), h);
  const FunctionSpec& G = system.G();
  auto f = [&](double s) { return eval(G, rho * std::cos(nn * s)) / nn - mean; };
  const double tol = 1e-13 * std::max(1.0, std::sqrt(h));
  const quad::Result r = quad::gauss_kronrod(f, a, b, tol, 0.0, 20000);
  if (!r.converged) throw Error(ErrorKind::PrecisionFailure, "S2 quadrature did not converge");
  return r.value;
}

double s3_integral(const DuffingSystem& system, double h, double t, double mean, double a,
                   double b) {
  const double nn = static_cast<double>(system.n());
  const double amp = -radius(system.n(), h) / nn;
  const fn::TrigPoly& p = system.p();
  auto f = [&](double s) { return amp * std::cos(nn * s) * eval(p, t + s) - mean; };
  const double tol = 1e-13 * std::max(1.0, std::sqrt(h));
  const quad::Result r = quad::gauss_kronrod(f, a, b, tol, 0.0, 20000);
  if (!r.converged) throw Error(ErrorKind::PrecisionFailure, "S3 quadrature did not converge");
  return r.value;
}

}  // namespace

double generating_S2(const DuffingSystem& system, double h, double theta) {
  if (!(h > 0.0)) throw Error(ErrorKind::DegenerateState, "S2 needs h > 0");
  return s2_integral(system, h, avg_f1(system, h), 0.0, theta);
}

double generating_S3(const DuffingSystem& system, double h, double t, double theta) {
  if (!(h > 0.0)) throw Error(ErrorKind::DegenerateState, "S3 needs h > 0");
  return s3_integral(system, h, t, avg_f2(system, h, t), 0.0, theta);
}

double generating_S2_bound(const DuffingSystem& system, double h) {
  // |f1 - [f1]| <= 2 sup|g| |x| / n and the integral runs over at most 2 pi.
  const double nn = static_cast<double>(system.n());
  return 2.0 * kTwoPi * sup_bound(system.g()) * std::sqrt(2.0 / nn) / nn * std::sqrt(h);
}

NormalFormReport normalform_check(const DuffingSystem& system, double h,
                                  std::size_t theta_samples, std::size_t t_samples) {
  if (theta_samples < 2 || t_samples < 1)
    throw Error(ErrorKind::Validation, "normalform_check needs samples");
  NormalFormReport rep;
  rep.h = h;
  const double root = std::sqrt(h);
  const double nn = static_cast<double>(system.n());
  const double rho = radius(system.n(), h);
  const double mean1 = avg_f1(system, h);

  rep.s2_closure = std::abs(s2_integral(system, h, mean1, 0.0, kTwoPi)) / root;
  double running = 0.0, previous = 0.0;
  for (std::size_t k = 0; k < theta_samples; ++k) {
    const double theta = kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(theta_samples);
    running += s2_integral(system, h, mean1, previous, theta);
    previous = theta;
    rep.s2_max = std::max(rep.s2_max, std::abs(running) / root);
    const double slope =
        s2_integral(system, h, mean1, theta - kThetaStep, theta + kThetaStep) / (2.0 * kThetaStep);
    const double direct = eval(system.G(), rho * std::cos(nn * theta)) / nn - mean1;
    rep.s2_cancellation = std::max(rep.s2_cancellation, std::abs(slope - direct) / root);
  }
  rep.s2_bound = generating_S2_bound(system, h) / root;

  for (std::size_t j = 0; j < t_samples; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(t_samples);
    const double mean2 = avg_f2(system, h, t);
    rep.s3_closure =
        std::max(rep.s3_closure, std::abs(s3_integral(system, h, t, mean2, 0.0, kTwoPi)) / root);
    for (std::size_t k = 0; k < theta_samples; ++k) {
      const double theta =
          kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(theta_samples);
      const double slope = s3_integral(system, h, t, mean2, theta - kThetaStep, theta + kThetaStep) /
                           (2.0 * kThetaStep);
      const double direct = -rho * std::cos(nn * theta) * eval(system.p(), t + theta) / nn - mean2;
      rep.s3_cancellation = std::max(rep.s3_cancellation, std::abs(slope - direct) / root);
    }
  }
  rep.ok = rep.s2_closure <= 1e-10 && rep.s3_closure <= 1e-10 && rep.s2_cancellation <= 1e-7 &&
           rep.s3_cancellation <= 1e-7 && rep.s2_max <= rep.s2_bound;
  return rep;
}

nlohmann::json to_json(const NormalFormReport& r) {
  return {{"h", r.h},
          {"s2_closure", r.s2_closure},
          {"s3_closure", r.s3_closure},
          {"s2_cancellation", r.s2_cancellation},
          {"s3_cancellation", r.s3_cancellation},
          {"s2_max_scaled", r.s2_max},
          {"s2_bound_constant", r.s2_bound},
          {"ok", r.ok}};
}

nlohmann::json to_json(const DerivativeScalingReport& r) {
  return {{"fit", to_json(r.fit)},
          {"predicted_level", r.predicted_level},
          {"observed_level", r.observed_level},
          {"level_relative_error", r.level_relative_error},
          {"slope_ok", r.slope_ok},
          {"level_ok", r.level_ok}};
}

}  // namespace duffing
