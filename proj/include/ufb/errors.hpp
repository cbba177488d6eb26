#pragma once

#include <stdexcept>
#include <string>

namespace ufb {

enum class ErrorCode {
  ZeroForm,
  NotOrthogonal,
  NotUnit,
  OriginDerivative,
  NotConverged,
  MaxIterations,
  InnerDivergence,
  TooCoarse,
  EmptySurface,
  DegenerateFit,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is the
/// machine-readable part; what() carries a human-readable description.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroForm: return "ZeroForm";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::OriginDerivative: return "OriginDerivative";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InnerDivergence: return "InnerDivergence";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::EmptySurface: return "EmptySurface";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ufb
