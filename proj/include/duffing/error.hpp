#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duffing {

enum class ErrorKind {
  InadmissibleG,
  InadmissiblePsi,
  UnsupportedExponent,
  DegenerateState,
  PrecisionFailure,
  FitDegenerate,
  HTooSmall,
  SolverFailure,
  StiffnessFailure,
  AmplitudeTooLarge,
  NotApplicable,
  Validation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InadmissibleG: return "inadmissible-g";
    case ErrorKind::InadmissiblePsi: return "inadmissible-psi";
    case ErrorKind::UnsupportedExponent: return "unsupported-exponent";
    case ErrorKind::DegenerateState: return "degenerate-state";
    case ErrorKind::PrecisionFailure: return "precision-failure";
    case ErrorKind::FitDegenerate: return "fit-degenerate";
    case ErrorKind::HTooSmall: return "h-too-small";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::StiffnessFailure: return "stiffness-failure";
    case ErrorKind::AmplitudeTooLarge: return "amplitude-too-large";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

/// True for the failures the harness reports with the numeric exit code.
constexpr bool is_numeric_failure(ErrorKind kind) {
  return kind == ErrorKind::PrecisionFailure || kind == ErrorKind::SolverFailure ||
         kind == ErrorKind::StiffnessFailure || kind == ErrorKind::AmplitudeTooLarge ||
         kind == ErrorKind::FitDegenerate || kind == ErrorKind::HTooSmall;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace duffing
