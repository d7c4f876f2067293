#include "duffing/function_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "duffing/error.hpp"

namespace duffing {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ln(1 + x^2) without overflow for huge |x|.
double log1p_square(double x) {
  const double ax = std::abs(x);
  if (ax > 1e150) return 2.0 * std::log(ax) + std::log1p(1.0 / (ax * ax));
  return std::log1p(x * x);
}

double harmonic_wavenumber(const fn::TrigPoly& tp, std::size_t m) {
  return 2.0 * kPi * static_cast<double>(m) / tp.period;
}

double eval_trig(const fn::TrigPoly& tp, double x) {
  double acc = tp.constant;
  const std::size_t count = std::max(tp.cos.size(), tp.sin.size());
  for (std::size_t i = 0; i < count; ++i) {
    const double arg = harmonic_wavenumber(tp, i + 1) * x;
    if (i < tp.cos.size() && tp.cos[i] != 0.0) acc += tp.cos[i] * std::cos(arg);
    if (i < tp.sin.size() && tp.sin[i] != 0.0) acc += tp.sin[i] * std::sin(arg);
  }
  return acc;
}

fn::TrigPoly differentiate_trig(const fn::TrigPoly& tp) {
  fn::TrigPoly out;
  out.period = tp.period;
  const std::size_t count = std::max(tp.cos.size(), tp.sin.size());
  out.cos.assign(count, 0.0);
  out.sin.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double k = harmonic_wavenumber(tp, i + 1);
    const double a = i < tp.cos.size() ? tp.cos[i] : 0.0;
    const double b = i < tp.sin.size() ? tp.sin[i] : 0.0;
    out.cos[i] = k * b;
    out.sin[i] = -k * a;
  }
  return out;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::Validation, std::string(what) + " must be finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

FunctionSpec FunctionSpec::constant(double c) {
  require_finite(c, "constant");
  return FunctionSpec(fn::Constant{c});
}

FunctionSpec FunctionSpec::arctan(double scale) {
  require_finite(scale, "arctan scale");
  return FunctionSpec(fn::Arctan{scale});
}

FunctionSpec FunctionSpec::algebraic_tail(double c, double e) {
  require_finite(c, "algebraic_tail c");
  require_finite(e, "algebraic_tail e");
  if (!(e > 0.5)) throw Error(ErrorKind::Validation, "algebraic_tail requires e > 1/2");
  return FunctionSpec(fn::AlgebraicTail{c, e});
}

FunctionSpec FunctionSpec::trig_poly(double period, std::vector<double> cos_coeffs,
                                     std::vector<double> sin_coeffs, double constant) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw Error(ErrorKind::Validation, "trig_poly period must be positive");
  for (double v : cos_coeffs) require_finite(v, "trig_poly coefficient");
  for (double v : sin_coeffs) require_finite(v, "trig_poly coefficient");
  require_finite(constant, "trig_poly constant");
  return FunctionSpec(fn::TrigPoly{period, constant, std::move(cos_coeffs), std::move(sin_coeffs)});
}

FunctionSpec FunctionSpec::rational1(double c) {
  require_finite(c, "rational1 c");
  return FunctionSpec(fn::Rational1{c});
}

FunctionSpec FunctionSpec::sum(std::vector<FunctionSpec> terms) {
  fn::Sum flat;
  for (auto& t : terms) {
    if (const auto* s = t.as<fn::Sum>()) {
      flat.terms.insert(flat.terms.end(), s->terms.begin(), s->terms.end());
    } else {
      flat.terms.push_back(std::move(t));
    }
  }
  return FunctionSpec(std::move(flat));
}

FunctionSpec FunctionSpec::scaled(double k, FunctionSpec child) {
  require_finite(k, "scaled k");
  return FunctionSpec(fn::Scaled{k, std::make_shared<const FunctionSpec>(std::move(child))});
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const FunctionSpec& spec, double x) {
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return v.c; },
          [x](const fn::Arctan& v) { return v.scale * std::atan(x); },
          [x](const fn::AlgebraicTail& v) { return v.c * x * std::exp(-v.e * log1p_square(x)); },
          [x](const fn::TrigPoly& v) { return eval_trig(v, x); },
          [x](const fn::Rational1& v) { return v.c * x / (1.0 + x * x); },
          [x](const fn::Sum& v) {
            double acc = 0.0;
            for (const auto& t : v.terms) acc += eval(t, x);
            return acc;
          },
          [x](const fn::Scaled& v) { return v.k * eval(*v.child, x); },
          [x](const fn::Linear& v) { return v.slope * x; },
          [x](const fn::ArctanIntegral& v) {
            return v.scale * (x * std::atan(x) - 0.5 * log1p_square(x));
          },
          [x](const fn::PowerBump& v) { return v.c * std::expm1(v.q * log1p_square(x)); },
          [x](const fn::Log1pSquare& v) { return v.c * log1p_square(x); },
          [x](const fn::Derivative& v) { return derivative_at(*v.child, x); },
      },
      spec.node());
}

double eval(const fn::TrigPoly& tp, double x) { return eval_trig(tp, x); }

double derivative_at(const FunctionSpec& spec, double x) {
  return std::visit(
      Overloaded{
          [](const fn::Constant&) { return 0.0; },
          [x](const fn::Arctan& v) { return v.scale / (1.0 + x * x); },
          [x](const fn::AlgebraicTail& v) {
            const double s = 1.0 + x * x;
            return v.c * std::exp(-v.e * log1p_square(x)) * (1.0 - 2.0 * v.e * x * x / s);
          },
          [x](const fn::TrigPoly& v) { return eval_trig(differentiate_trig(v), x); },
          [x](const fn::Rational1& v) {
            const double s = 1.0 + x * x;
            return v.c * (1.0 - x * x) / (s * s);
          },
          [x](const fn::Sum& v) {
            double acc = 0.0;
            for (const auto& t : v.terms) acc += derivative_at(t, x);
            return acc;
          },
          [x](const fn::Scaled& v) { return v.k * derivative_at(*v.child, x); },
          [](const fn::Linear& v) { return v.slope; },
          [x](const fn::ArctanIntegral& v) { return v.scale * std::atan(x); },
          [x](const fn::PowerBump& v) {
            return v.c * v.q * 2.0 * x * std::exp((v.q - 1.0) * log1p_square(x));
          },
          [x](const fn::Log1pSquare& v) { return v.c * 2.0 * x / (1.0 + x * x); },
          [](const fn::Derivative&) -> double {
            throw Error(ErrorKind::Validation, "second derivatives are outside the grammar");
          },
      },
      spec.node());
}

FunctionSpec derivative(const FunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const fn::Constant&) { return FunctionSpec::constant(0.0); },
          [](const fn::TrigPoly& v) { return FunctionSpec(differentiate_trig(v)); },
          [](const fn::Linear& v) { return FunctionSpec::constant(v.slope); },
          [](const fn::ArctanIntegral& v) { return FunctionSpec::arctan(v.scale); },
          [](const fn::Log1pSquare& v) { return FunctionSpec::rational1(2.0 * v.c); },
          [](const fn::Sum& v) {
            std::vector<FunctionSpec> terms;
            terms.reserve(v.terms.size());
            for (const auto& t : v.terms) terms.push_back(derivative(t));
            return FunctionSpec::sum(std::move(terms));
          },
          [](const fn::Scaled& v) { return FunctionSpec::scaled(v.k, derivative(*v.child)); },
          [&spec](const auto&) {
            return FunctionSpec(fn::Derivative{std::make_shared<const FunctionSpec>(spec)});
          },
      },
      spec.node());
}

FunctionSpec antiderivative(const FunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return FunctionSpec(fn::Linear{v.c}); },
          [](const fn::Arctan& v) { return FunctionSpec(fn::ArctanIntegral{v.scale}); },
          [](const fn::AlgebraicTail& v) {
            if (v.e == 1.0)
              throw Error(ErrorKind::UnsupportedExponent,
                          "algebraic_tail with e = 1 has a logarithmic antiderivative");
            const double q = 1.0 - v.e;
            return FunctionSpec(fn::PowerBump{v.c / (2.0 * q), q});
          },
          [](const fn::Rational1& v) { return FunctionSpec(fn::Log1pSquare{0.5 * v.c}); },
          [](const fn::TrigPoly& v) {
            // a cos(kx) -> (a/k) sin(kx); b sin(kx) -> (b/k)(1 - cos(kx)).
            fn::TrigPoly out;
            out.period = v.period;
            const std::size_t count = std::max(v.cos.size(), v.sin.size());
            out.cos.assign(count, 0.0);
            out.sin.assign(count, 0.0);
            for (std::size_t i = 0; i < count; ++i) {
              const double k = harmonic_wavenumber(v, i + 1);
              const double a = i < v.cos.size() ? v.cos[i] : 0.0;
              const double b = i < v.sin.size() ? v.sin[i] : 0.0;
              out.sin[i] = a / k;
              out.cos[i] = -b / k;
              out.constant += b / k;
            }
            if (v.constant == 0.0) return FunctionSpec(std::move(out));
            return FunctionSpec::sum({FunctionSpec(fn::Linear{v.constant}), FunctionSpec(std::move(out))});
          },
          [](const fn::Sum& v) {
            std::vector<FunctionSpec> terms;
            terms.reserve(v.terms.size());
            for (const auto& t : v.terms) terms.push_back(antiderivative(t));
            return FunctionSpec::sum(std::move(terms));
          },
          [](const fn::Scaled& v) { return FunctionSpec::scaled(v.k, antiderivative(*v.child)); },
          [](const fn::Derivative& v) { return *v.child; },
          [](const auto&) -> FunctionSpec {
            throw Error(ErrorKind::Validation, "antiderivative of an internal variant is outside the grammar");
          },
      },
      spec.node());
}

Limits limits_at_infinity(const FunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return Limits{v.c, v.c}; },
          [](const fn::Arctan& v) { return Limits{-v.scale * kPi / 2.0, v.scale * kPi / 2.0}; },
          [](const fn::AlgebraicTail&) { return Limits{0.0, 0.0}; },
          [](const fn::Rational1&) { return Limits{0.0, 0.0}; },
          [](const fn::Sum& v) {
            Limits acc;
            for (const auto& t : v.terms) {
              const Limits l = limits_at_infinity(t);
              acc.minus += l.minus;
              acc.plus += l.plus;
            }
            return acc;
          },
          [](const fn::Scaled& v) {
            const Limits l = limits_at_infinity(*v.child);
            return Limits{v.k * l.minus, v.k * l.plus};
          },
          [](const fn::TrigPoly&) -> Limits {
            throw Error(ErrorKind::InadmissibleG, "trig_poly has no limit at infinity");
          },
          [](const fn::Linear& v) -> Limits {
            if (v.slope == 0.0) return Limits{0.0, 0.0};
            throw Error(ErrorKind::InadmissibleG, "linear term is unbounded");
          },
          [](const auto&) -> Limits {
            throw Error(ErrorKind::InadmissibleG, "variant has no finite limit at infinity");
          },
      },
      spec.node());
}

// ---------------------------------------------------------------------------
// Periodic canonicalization

namespace {

void accumulate_trig(const FunctionSpec& spec, double period, double weight, fn::TrigPoly& out) {
  std::visit(
      Overloaded{
          [&](const fn::Constant& v) { out.constant += weight * v.c; },
          [&](const fn::TrigPoly& v) {
            // Harmonic m of v.period is harmonic m * ratio of period.
            const double ratio = period / v.period;
            const double rounded = std::round(ratio);
            const bool has_harmonics =
                std::any_of(v.cos.begin(), v.cos.end(), [](double c) { return c != 0.0; }) ||
                std::any_of(v.sin.begin(), v.sin.end(), [](double c) { return c != 0.0; });
            if (has_harmonics && (rounded < 1.0 || std::abs(ratio - rounded) > 1e-12 * ratio))
              throw Error(ErrorKind::InadmissiblePsi, "trig_poly period is incommensurate with " +
                                                          std::to_string(period));
            out.constant += weight * v.constant;
            const auto stride = static_cast<std::size_t>(rounded);
            const std::size_t count = std::max(v.cos.size(), v.sin.size());
            if (count * stride > out.cos.size()) {
              out.cos.resize(count * stride, 0.0);
              out.sin.resize(count * stride, 0.0);
            }
            for (std::size_t i = 0; i < count; ++i) {
              const std::size_t j = (i + 1) * stride - 1;
              if (i < v.cos.size()) out.cos[j] += weight * v.cos[i];
              if (i < v.sin.size()) out.sin[j] += weight * v.sin[i];
            }
          },
          [&](const fn::Sum& v) {
            for (const auto& t : v.terms) accumulate_trig(t, period, weight, out);
          },
          [&](const fn::Scaled& v) { accumulate_trig(*v.child, period, weight * v.k, out); },
          [](const auto&) {
            throw Error(ErrorKind::InadmissiblePsi, "function is not periodic");
          },
      },
      spec.node());
}

std::optional<double> largest_period(const FunctionSpec& spec) {
  if (const auto* tp = spec.as<fn::TrigPoly>()) return tp->period;
  if (const auto* sc = spec.as<fn::Scaled>()) return largest_period(*sc->child);
  if (const auto* sum = spec.as<fn::Sum>()) {
    std::optional<double> best;
    for (const auto& t : sum->terms) {
      const auto p = largest_period(t);
      if (p && (!best || *p > *best)) best = p;
    }
    return best;
  }
  return std::nullopt;
}

}  // namespace

fn::TrigPoly as_trig_poly(const FunctionSpec& spec, double period) {
  if (!(period > 0.0)) throw Error(ErrorKind::InadmissiblePsi, "period must be positive");
  fn::TrigPoly out;
  out.period = period;
  accumulate_trig(spec, period, 1.0, out);
  while (!out.cos.empty() && out.cos.back() == 0.0 && out.sin.back() == 0.0) {
    out.cos.pop_back();
    out.sin.pop_back();
  }
  return out;
}

FunctionSpec zero_mean_normalize(const FunctionSpec& psi, double period) {
  fn::TrigPoly tp = as_trig_poly(psi, period);
  tp.constant = 0.0;
  return FunctionSpec(std::move(tp));
}

fn::TrigPoly time_shifted(const fn::TrigPoly& p, double tau) {
  fn::TrigPoly out = p;
  const std::size_t count = std::max(p.cos.size(), p.sin.size());
  out.cos.assign(count, 0.0);
  out.sin.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double phase = harmonic_wavenumber(p, i + 1) * tau;
    const double a = i < p.cos.size() ? p.cos[i] : 0.0;
    const double b = i < p.sin.size() ? p.sin[i] : 0.0;
    out.cos[i] = a * std::cos(phase) + b * std::sin(phase);
    out.sin[i] = b * std::cos(phase) - a * std::sin(phase);
  }
  return out;
}

double sup_bound(const FunctionSpec& spec) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return std::abs(v.c); },
          [](const fn::Arctan& v) { return std::abs(v.scale) * kPi / 2.0; },
          [](const fn::AlgebraicTail& v) {
            const double xs = 1.0 / std::sqrt(2.0 * v.e - 1.0);
            return std::abs(v.c) * xs * std::pow(1.0 + xs * xs, -v.e);
          },
          [](const fn::TrigPoly& v) {
            double acc = std::abs(v.constant);
            for (double c : v.cos) acc += std::abs(c);
            for (double s : v.sin) acc += std::abs(s);
            return acc;
          },
          [](const fn::Rational1& v) { return std::abs(v.c) / 2.0; },
          [](const fn::Sum& v) {
            double acc = 0.0;
            for (const auto& t : v.terms) acc += sup_bound(t);
            return acc;
          },
          [](const fn::Scaled& v) { return std::abs(v.k) * sup_bound(*v.child); },
          [](const fn::Linear& v) { return v.slope == 0.0 ? 0.0 : inf; },
          [](const fn::Derivative& v) {
            if (const auto* tp = v.child->as<fn::TrigPoly>()) return sup_bound(FunctionSpec(differentiate_trig(*tp)));
            if (const auto* at = v.child->as<fn::Arctan>()) return std::abs(at->scale);
            return inf;
          },
          [](const auto&) { return inf; },
      },
      spec.node());
}

FarField far_field(const FunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return FarField{0.0, v.c, v.c}; },
          [](const fn::Linear&) { return FarField{}; },
          // x atan x = pi|x|/2 - 1 + O(x^-2), ln(1+x^2)/2 = ln|x| + O(x^-2)
          [](const fn::ArctanIntegral& v) { return FarField{-v.scale, -v.scale, -v.scale}; },
          // (1+x^2)^q has no x^0 term in its expansion for q < 1/2, q != 0.
          [](const fn::PowerBump& v) { return FarField{0.0, -v.c, -v.c}; },
          [](const fn::Log1pSquare& v) { return FarField{2.0 * v.c, 0.0, 0.0}; },
          [](const fn::Sum& v) {
            FarField acc;
            for (const auto& t : v.terms) {
              const FarField f = far_field(t);
              acc.log_coefficient += f.log_coefficient;
              acc.offset_plus += f.offset_plus;
              acc.offset_minus += f.offset_minus;
            }
            return acc;
          },
          [](const fn::Scaled& v) {
            const FarField f = far_field(*v.child);
            return FarField{v.k * f.log_coefficient, v.k * f.offset_plus, v.k * f.offset_minus};
          },
          [](const auto&) -> FarField {
            throw Error(ErrorKind::Validation, "far-field expansion is defined for antiderivatives of admissible g");
          },
      },
      spec.node());
}

bool is_identically_zero(const FunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return v.c == 0.0; },
          [](const fn::TrigPoly& v) {
            return v.constant == 0.0 && std::all_of(v.cos.begin(), v.cos.end(), [](double c) { return c == 0.0; }) &&
                   std::all_of(v.sin.begin(), v.sin.end(), [](double c) { return c == 0.0; });
          },
          [](const fn::Sum& v) {
            return std::all_of(v.terms.begin(), v.terms.end(), [](const FunctionSpec& t) { return is_identically_zero(t); });
          },
          [](const fn::Scaled& v) { return v.k == 0.0 || is_identically_zero(*v.child); },
          [](const fn::Arctan& v) { return v.scale == 0.0; },
          [](const fn::AlgebraicTail& v) { return v.c == 0.0; },
          [](const fn::Rational1& v) { return v.c == 0.0; },
          [](const auto&) { return false; },
      },
      spec.node());
}

// ---------------------------------------------------------------------------
// JSON

namespace {

double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorKind::Validation, std::string("missing numeric key '") + key + "'");
  return j.at(key).get<double>();
}

std::vector<double> number_array(const nlohmann::json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw Error(ErrorKind::Validation, std::string("'") + key + "' must be an array");
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw Error(ErrorKind::Validation, std::string("'") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const FunctionSpec& spec) {
  using nlohmann::json;
  return std::visit(
      Overloaded{
          [](const fn::Constant& v) { return json{{"kind", "constant"}, {"c", v.c}}; },
          [](const fn::Arctan& v) { return json{{"kind", "arctan"}, {"scale", v.scale}}; },
          [](const fn::AlgebraicTail& v) { return json{{"kind", "algebraic_tail"}, {"c", v.c}, {"e", v.e}}; },
          [](const fn::TrigPoly& v) {
            json j{{"kind", "trig_poly"}, {"period", v.period}, {"cos", v.cos}, {"sin", v.sin}};
            if (v.constant != 0.0) j["constant"] = v.constant;
            return j;
          },
          [](const fn::Rational1& v) { return json{{"kind", "rational1"}, {"c", v.c}}; },
          [](const fn::Sum& v) {
            json terms = json::array();
            for (const auto& t : v.terms) terms.push_back(to_json(t));
            return json{{"kind", "sum"}, {"terms", terms}};
          },
          [](const fn::Scaled& v) { return json{{"kind", "scaled"}, {"k", v.k}, {"child", to_json(*v.child)}}; },
          [](const auto&) -> json {
            throw Error(ErrorKind::Validation, "internal variants have no config representation");
          },
      },
      spec.node());
}

FunctionSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::Validation, "function spec must be an object with a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return FunctionSpec::constant(require_number(j, "c"));
  if (kind == "arctan") return FunctionSpec::arctan(j.contains("scale") ? require_number(j, "scale") : 1.0);
  if (kind == "algebraic_tail") return FunctionSpec::algebraic_tail(require_number(j, "c"), require_number(j, "e"));
  if (kind == "rational1") return FunctionSpec::rational1(require_number(j, "c"));
  if (kind == "trig_poly") {
    const double period = j.contains("period") ? require_number(j, "period") : 2.0 * kPi;
    const double constant = j.contains("constant") ? require_number(j, "constant") : 0.0;
    return FunctionSpec::trig_poly(period, number_array(j, "cos"), number_array(j, "sin"), constant);
  }
  if (kind == "sum") {
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw Error(ErrorKind::Validation, "sum requires a 'terms' array");
    std::vector<FunctionSpec> terms;
    for (const auto& t : j.at("terms")) terms.push_back(spec_from_json(t));
    return FunctionSpec::sum(std::move(terms));
  }
  if (kind == "scaled") {
    if (!j.contains("child")) throw Error(ErrorKind::Validation, "scaled requires a 'child'");
    return FunctionSpec::scaled(require_number(j, "k"), spec_from_json(j.at("child")));
  }
  throw Error(ErrorKind::Validation, "unknown function kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// DuffingSystem

DuffingSystem DuffingSystem::make(int n, FunctionSpec g, FunctionSpec psi, FunctionSpec p) {
  if (n < 1) throw Error(ErrorKind::Validation, "resonance order n must be positive");
  DuffingSystem s;
  s.n_ = n;
  s.limits_ = limits_at_infinity(g);
  s.G_ = antiderivative(g);
  s.g_ = std::move(g);

  s.psi_poly_ = as_trig_poly(psi, largest_period(psi).value_or(2.0 * kPi));
  s.psi_poly_.constant = 0.0;
  s.psi_ = FunctionSpec(s.psi_poly_);
  s.psi_prime_ = derivative(s.psi_);

  try {
    s.p_ = as_trig_poly(p, 2.0 * kPi);
  } catch (const Error& e) {
    throw Error(ErrorKind::Validation, std::string("forcing must be 2 pi periodic: ") + e.what());
  }
  return s;
}

bool DuffingSystem::has_psi() const noexcept { return !is_identically_zero(FunctionSpec(psi_poly_)); }

std::pair<double, double> DuffingSystem::forcing_harmonic(int m) const noexcept {
  if (m == 0) return {p_.constant, 0.0};
  const auto i = static_cast<std::size_t>(m - 1);
  return {i < p_.cos.size() ? p_.cos[i] : 0.0, i < p_.sin.size() ? p_.sin[i] : 0.0};
}

DuffingSystem DuffingSystem::autonomous() const {
  DuffingSystem s = *this;
  s.p_ = fn::TrigPoly{};
  s.psi_poly_ = fn::TrigPoly{};
  s.psi_ = FunctionSpec(s.psi_poly_);
  s.psi_prime_ = derivative(s.psi_);
  return s;
}

DuffingSystem DuffingSystem::with_forcing(FunctionSpec p) const {
  DuffingSystem s = *this;
  s.p_ = as_trig_poly(p, 2.0 * kPi);
  return s;
}

DuffingSystem DuffingSystem::time_shifted(double tau) const {
  DuffingSystem s = *this;
  s.p_ = duffing::time_shifted(p_, tau);
  return s;
}

nlohmann::json to_json(const DuffingSystem& system) {
  nlohmann::json j;
  j["n"] = system.n();
  j["g"] = to_json(system.g());
  j["psi"] = to_json(system.psi());
  j["p"] = to_json(FunctionSpec(system.p()));
  return j;
}

DuffingSystem system_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, "system must be an object");
  if (!j.contains("n") || !j.at("n").is_number_integer())
    throw Error(ErrorKind::Validation, "system requires integer 'n'");
  if (!j.contains("g")) throw Error(ErrorKind::Validation, "system requires 'g'");
  if (!j.contains("p")) throw Error(ErrorKind::Validation, "system requires 'p'");
  FunctionSpec psi = j.contains("psi") ? spec_from_json(j.at("psi")) : FunctionSpec::constant(0.0);
  try {
    return DuffingSystem::make(j.at("n").get<int>(), spec_from_json(j.at("g")), std::move(psi),
                               spec_from_json(j.at("p")));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InadmissibleG || e.kind() == ErrorKind::InadmissiblePsi ||
        e.kind() == ErrorKind::UnsupportedExponent)
      throw;
    throw Error(ErrorKind::Validation, e.what());
  }
}

}  // namespace duffing
