#include "duffing/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "duffing/error.hpp"

namespace duffing {

namespace {

constexpr int kStages = 12;

constexpr std::array<double, kStages> kC = {
    0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726,
    0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0};

constexpr double kA[kStages][kStages] = {
    {},
    {0.05260015195876773},
    {0.0197250569845379, 0.0591751709536137},
    {0.02958758547680685, 0.0, 0.08876275643042054},
    {0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792},
    {0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242},
    {0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125},
    {0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328,
     -0.015319437748624402, 0.008273789163814023},
    {0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671,
     20.154067550477894, -43.48988418106996},
    {0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193,
     15.279233632882423, -33.28821096898486, -0.020331201708508627},
    {-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927,
     -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196},
    {2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188,
     27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303,
     0.6433927460157636},
};

constexpr std::array<double, kStages> kB = {
    0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003,
    -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034,
    0.04471061572777259};

constexpr std::array<double, kStages> kE3 = {
    -0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003,
    -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034,
    0.02265179219836082};

constexpr std::array<double, kStages> kE5 = {
    0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502,
    1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571,
    -0.022355307863886294};

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;                  // integral gain of the PI controller
constexpr double kExpo = 1.0 / 8.0 - kBeta * 0.2;
constexpr double kMinShrink = 1.0 / 3.0;        // h_new >= h / 3
constexpr double kMaxGrow = 6.0;                // h_new <= 6 h
constexpr std::size_t kMaxSteps = 200'000'000;

double scaled_norm(const Vec2& v, const Vec2& sc) {
  const double a = v[0] / sc[0], b = v[1] / sc[1];
  return std::sqrt(0.5 * (a * a + b * b));
}

}  // namespace

void IntegratorStats::merge(const IntegratorStats& other) {
  steps += other.steps;
  rejected += other.rejected;
  max_error_estimate = std::max(max_error_estimate, other.max_error_estimate);
}

Dop853::Dop853(double tol) : tol_(tol) {
  if (!(tol >= 1e-14 && tol <= 1e-6))
    throw Error(ErrorKind::Validation, "tolerance must lie in [1e-14, 1e-6]");
}

double Dop853::initial_step(const Rhs2& f, double t0, const Vec2& y, const Vec2& f0,
                            double dir) const {
  Vec2 sc;
  for (int i = 0; i < 2; ++i) sc[i] = tol_ + tol_ * std::abs(y[i]);
  const double d0 = scaled_norm(y, sc), d1 = scaled_norm(f0, sc);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vec2 y1 = {y[0] + dir * h0 * f0[0], y[1] + dir * h0 * f0[1]};
  const Vec2 f1 = f(t0 + dir * h0, y1);
  const double d2 = scaled_norm({f1[0] - f0[0], f1[1] - f0[1]}, sc) / h0;
  const double big = std::max(d1, d2);
  const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / big, 1.0 / 8.0);
  return dir * std::min(100.0 * h0, h1);
}

Vec2 Dop853::advance(const Rhs2& f, double t0, Vec2 y, double t1) {
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  std::array<Vec2, kStages> k;
  k[0] = f(t, y);
  if (step_ == 0.0 || step_ * dir <= 0.0) step_ = initial_step(f, t, y, k[0], dir);

  bool last_rejected = false;
  std::size_t steps_here = 0;
  while ((t1 - t) * dir > 0.0) {
    if (++steps_here > kMaxSteps) throw Error(ErrorKind::SolverFailure, "step budget exhausted");
    const double remaining = t1 - t;
    const bool clipped = std::abs(step_) >= std::abs(remaining);
    const double h = clipped ? remaining : step_;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)) && !clipped)
      throw Error(ErrorKind::StiffnessFailure,
                  "step size collapsed to " + std::to_string(h) + " at t=" + std::to_string(t));

    for (int s = 1; s < kStages; ++s) {
      Vec2 ys = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] == 0.0) continue;
        ys[0] += h * kA[s][j] * k[j][0];
        ys[1] += h * kA[s][j] * k[j][1];
      }
      k[s] = f(t + kC[s] * h, ys);
    }
    Vec2 ynew = y, e3 = {0.0, 0.0}, e5 = {0.0, 0.0};
    for (int s = 0; s < kStages; ++s) {
      ynew[0] += h * kB[s] * k[s][0];
      ynew[1] += h * kB[s] * k[s][1];
      e3[0] += kE3[s] * k[s][0];
      e3[1] += kE3[s] * k[s][1];
      e5[0] += kE5[s] * k[s][0];
      e5[1] += kE5[s] * k[s][1];
    }
    double err5 = 0.0, err3 = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = tol_ + tol_ * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err5 += (e5[i] / sc) * (e5[i] / sc);
      err3 += (e3[i] / sc) * (e3[i] / sc);
    }
    const double deno = err5 + 0.01 * err3;
    const double err = deno > 0.0 ? std::abs(h) * err5 / std::sqrt(2.0 * deno) : 0.0;
    if (!std::isfinite(err) || !std::isfinite(ynew[0]) || !std::isfinite(ynew[1])) {
      step_ = h * kMinShrink;
      ++stats_.rejected;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold_, kBeta) / kSafety;
      fac = std::clamp(fac, 1.0 / kMaxGrow, 1.0 / kMinShrink);
      double hnew = h / fac;
      if (last_rejected) hnew = dir * std::min(std::abs(hnew), std::abs(h));
      facold_ = std::max(err, 1e-4);
      t = clipped ? t1 : t + h;
      y = ynew;
      ++stats_.steps;
      stats_.max_error_estimate = std::max(stats_.max_error_estimate, err);
      // A clipped step says nothing about the natural step size.
      if (!clipped || std::abs(hnew) < std::abs(step_)) step_ = hnew;
      if ((t1 - t) * dir > 0.0) k[0] = f(t, y);
      last_rejected = false;
    } else {
      const double fac = std::min(1.0 / kMinShrink, fac11 / kSafety);
      step_ = h / fac;
      ++stats_.rejected;
      last_rejected = true;
    }
  }
  return y;
}

}  // namespace duffing
