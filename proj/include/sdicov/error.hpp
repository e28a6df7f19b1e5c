#pragma once

#include <stdexcept>
#include <string>

namespace sdicov {

enum class ErrorCode {
  ZeroDirection,
  NearSingular,
  DimensionMismatch,
  NonPositiveCurvature,
  NonDescent,
  Breakdown,
  IndexOutOfRange,
  NotPositiveDefinite,
  MissingHessian,
  InvalidInput,
  Config,
  Io,
  Parse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveCurvature: return "NonPositiveCurvature";
    case ErrorCode::NonDescent: return "NonDescent";
    case ErrorCode::Breakdown: return "Breakdown";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::MissingHessian: return "MissingHessian";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Parse: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a typed error code; every failure in the library
/// surfaces as one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sdicov
