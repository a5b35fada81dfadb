#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace supobs {

enum class Errc {
  NonSquare,
  Asymmetric,
  NoConvergence,
  NotHurwitz,
  NotObservable,
  BadTargets,
  DimensionMismatch,
  NonFiniteDerivative,
  TrajectoryBlowUp,
  ZeroSectorBound,
  NotNSD,
  BadP,
  BadM,
  SynthesisBudgetExhausted,
  CertificateViolated,
  EmptySet,
  EmptyIntersection,
  WindowTooLong,
  InvalidTrace,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported through this type; `code()` identifies
// the failure class named in the operation contracts.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::Asymmetric: return "Asymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotHurwitz: return "NotHurwitz";
    case Errc::NotObservable: return "NotObservable";
    case Errc::BadTargets: return "BadTargets";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteDerivative: return "NonFiniteDerivative";
    case Errc::TrajectoryBlowUp: return "TrajectoryBlowUp";
    case Errc::ZeroSectorBound: return "ZeroSectorBound";
    case Errc::NotNSD: return "NotNSD";
    case Errc::BadP: return "BadP";
    case Errc::BadM: return "BadM";
    case Errc::SynthesisBudgetExhausted: return "SynthesisBudgetExhausted";
    case Errc::CertificateViolated: return "CertificateViolated";
    case Errc::EmptySet: return "EmptySet";
    case Errc::EmptyIntersection: return "EmptyIntersection";
    case Errc::WindowTooLong: return "WindowTooLong";
    case Errc::InvalidTrace: return "InvalidTrace";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace supobs
