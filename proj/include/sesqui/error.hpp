#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sesqui {

enum class ErrorCode {
  InvalidGrid,
  AxisOutOfRange,
  DomainMismatch,
  InvalidDomain,
  NotUnitNorm,
  NonFinite,
  NearZeroVector,
  InvalidCoupling,
  NonpositiveDelta2,
  Delta2Zero,
  BallOutOfPatch,
  EmptyBallFamily,
  WrongDimension,
  InvalidArgument,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::AxisOutOfRange: return "AxisOutOfRange";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::NotUnitNorm: return "NotUnitNorm";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NearZeroVector: return "NearZeroVector";
    case ErrorCode::InvalidCoupling: return "InvalidCoupling";
    case ErrorCode::NonpositiveDelta2: return "NonpositiveDelta2";
    case ErrorCode::Delta2Zero: return "Delta2Zero";
    case ErrorCode::BallOutOfPatch: return "BallOutOfPatch";
    case ErrorCode::EmptyBallFamily: return "EmptyBallFamily";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every precondition violation in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace sesqui
