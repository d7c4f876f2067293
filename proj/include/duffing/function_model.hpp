#pragma once

// Closed function grammar for the nonlinearity g, the oscillating potential psi
// and the forcing p of  x'' + n^2 x + g(x) + psi'(x) = p(t).

#include <memory>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace duffing {

class FunctionSpec;

namespace fn {

struct Constant {
  double c = 0.0;
};

/// scale * arctan(x)
struct Arctan {
  double scale = 1.0;
};

/// c * x * (1 + x^2)^(-e), e > 1/2
struct AlgebraicTail {
  double c = 0.0;
  double e = 1.0;
};

/// constant + sum_m cos[m-1] cos(2 pi m x / period) + sin[m-1] sin(2 pi m x / period)
struct TrigPoly {
  double period = 2.0 * std::numbers::pi;
  double constant = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;
};

/// c * x / (1 + x^2)
struct Rational1 {
  double c = 0.0;
};

struct Sum {
  std::vector<FunctionSpec> terms;
};

struct Scaled {
  double k = 1.0;
  std::shared_ptr<const FunctionSpec> child;
};

// The variants below only appear as results of antiderivative()/derivative().

/// slope * x
struct Linear {
  double slope = 0.0;
};

/// scale * (x arctan x - ln(1 + x^2) / 2)
struct ArctanIntegral {
  double scale = 1.0;
};

/// c * ((1 + x^2)^q - 1)
struct PowerBump {
  double c = 0.0;
  double q = 0.0;
};

/// c * ln(1 + x^2)
struct Log1pSquare {
  double c = 0.0;
};

/// d/dx child, evaluated analytically.
struct Derivative {
  std::shared_ptr<const FunctionSpec> child;
};

}  // namespace fn

class FunctionSpec {
 public:
  using Node = std::variant<fn::Constant, fn::Arctan, fn::AlgebraicTail, fn::TrigPoly,
                            fn::Rational1, fn::Sum, fn::Scaled, fn::Linear,
                            fn::ArctanIntegral, fn::PowerBump, fn::Log1pSquare,
                            fn::Derivative>;

  FunctionSpec() : node_(fn::Constant{0.0}) {}
  FunctionSpec(Node node) : node_(std::move(node)) {}  // NOLINT(google-explicit-constructor)

  static FunctionSpec constant(double c);
  static FunctionSpec arctan(double scale = 1.0);
  /// Throws Validation unless e > 1/2.
  static FunctionSpec algebraic_tail(double c, double e);
  static FunctionSpec trig_poly(double period, std::vector<double> cos_coeffs,
                                std::vector<double> sin_coeffs, double constant = 0.0);
  static FunctionSpec rational1(double c);
  /// Nested sums are flattened.
  static FunctionSpec sum(std::vector<FunctionSpec> terms);
  static FunctionSpec scaled(double k, FunctionSpec child);

  const Node& node() const noexcept { return node_; }

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }

 private:
  Node node_;
};

struct Limits {
  double minus = 0.0;
  double plus = 0.0;
};

/// Large-|x| expansion of an antiderivative-type spec:
///   F(x) = slope(+/-) x + log_coefficient ln|x| + offset(+/-) + o(1).
/// Growing sub-linear powers are not part of the expansion.
struct FarField {
  double log_coefficient = 0.0;
  double offset_plus = 0.0;
  double offset_minus = 0.0;
};

double eval(const FunctionSpec& spec, double x);
double eval(const fn::TrigPoly& tp, double x);
double derivative_at(const FunctionSpec& spec, double x);

FunctionSpec derivative(const FunctionSpec& spec);
/// F with F(0) = 0 and F' = spec. Throws UnsupportedExponent for AlgebraicTail e == 1.
FunctionSpec antiderivative(const FunctionSpec& spec);

/// Throws InadmissibleG for TrigPoly leaves and unbounded internal variants.
Limits limits_at_infinity(const FunctionSpec& spec);

/// Canonical single TrigPoly of the given period. Throws InadmissiblePsi for
/// non-periodic input or incommensurate periods.
fn::TrigPoly as_trig_poly(const FunctionSpec& spec, double period);
FunctionSpec zero_mean_normalize(const FunctionSpec& psi, double period);

/// p(t + tau) for a TrigPoly p.
fn::TrigPoly time_shifted(const fn::TrigPoly& p, double tau);

/// Upper bound for sup_x |spec(x)|; +inf for unbounded variants.
double sup_bound(const FunctionSpec& spec);

FarField far_field(const FunctionSpec& spec);

bool is_identically_zero(const FunctionSpec& spec);

nlohmann::json to_json(const FunctionSpec& spec);
/// Throws Validation on unknown kinds or missing keys.
FunctionSpec spec_from_json(const nlohmann::json& j);

/// One equation instance x'' + n^2 x + g(x) + psi'(x) = p(t).
class DuffingSystem {
 public:
  /// Validates g (finite limits), normalizes psi to zero mean and canonicalizes
  /// p to a 2 pi TrigPoly. psi may be Constant(0) (no oscillating term).
  static DuffingSystem make(int n, FunctionSpec g, FunctionSpec psi, FunctionSpec p);

  int n() const noexcept { return n_; }
  const FunctionSpec& g() const noexcept { return g_; }
  const FunctionSpec& psi() const noexcept { return psi_; }
  const fn::TrigPoly& psi_poly() const noexcept { return psi_poly_; }
  double psi_period() const noexcept { return psi_poly_.period; }
  const fn::TrigPoly& p() const noexcept { return p_; }
  const FunctionSpec& G() const noexcept { return G_; }
  const FunctionSpec& psi_prime() const noexcept { return psi_prime_; }
  const Limits& g_limits() const noexcept { return limits_; }

  double delta_g() const noexcept { return limits_.plus - limits_.minus; }
  bool has_psi() const noexcept;

  /// Harmonic-m coefficients (a_m, b_m) of p(t) = a_0 + sum a_m cos mt + b_m sin mt.
  std::pair<double, double> forcing_harmonic(int m) const noexcept;

  DuffingSystem autonomous() const;
  DuffingSystem with_forcing(FunctionSpec p) const;
  DuffingSystem time_shifted(double tau) const;

 private:
  DuffingSystem() = default;

  int n_ = 1;
  FunctionSpec g_;
  FunctionSpec psi_;
  fn::TrigPoly psi_poly_;
  fn::TrigPoly p_;
  FunctionSpec G_;
  FunctionSpec psi_prime_;
  Limits limits_;
};

nlohmann::json to_json(const DuffingSystem& system);
DuffingSystem system_from_json(const nlohmann::json& j);

}  // namespace duffing
