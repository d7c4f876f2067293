#pragma once

// Explicit Dormand-Prince 8(5,3) pair with proportional-integral step control
// for planar non-autonomous systems.

#include <array>
#include <cstddef>
#include <functional>

namespace duffing {

using Vec2 = std::array<double, 2>;
using Rhs2 = std::function<Vec2(double t, const Vec2& y)>;

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_error_estimate = 0.0;  // largest accepted scaled error norm

  void merge(const IntegratorStats& other);
};

/// Advances y from t0 to t1 (either direction) with atol = rtol = tol.
/// `step` carries the signed step-size proposal between calls; pass 0 to let the
/// integrator choose one. Throws StiffnessFailure when the step collapses.
class Dop853 {
 public:
  explicit Dop853(double tol);

  Vec2 advance(const Rhs2& f, double t0, Vec2 y, double t1);

  double tol() const noexcept { return tol_; }
  const IntegratorStats& stats() const noexcept { return stats_; }
  void reset_step() noexcept { step_ = 0.0; }

 private:
  double initial_step(const Rhs2& f, double t0, const Vec2& y, const Vec2& f0, double dir) const;

  double tol_;
  double step_ = 0.0;
  double facold_ = 1e-4;
  IntegratorStats stats_;
};

}  // namespace duffing
