#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stabledecomp {

enum class ErrorCode {
  AlphaOutOfRange,
  NonPositiveWeight,
  ZeroColumn,
  DimensionMismatch,
  DuplicateLabel,
  TimesMismatch,
  AlphaMismatch,
  WeightNormViolation,
  NotAComponent,
  NonMonotone,
  InvalidFlow,
  InvalidCocycle,
  NotATorusIndex,
  FullSupportViolation,
  NotInvariant,
  NotStationary,
  InvarianceViolation,
  ZeroKernelSheet,
  NotMeasurePreserving,
  NegativeEntry,
  NonPositiveThreshold,
  EmptySample,
  SchemaError,
  DanglingLabel,
  IoError,
  UnknownCommand,
  UsageError,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::TimesMismatch: return "TimesMismatch";
    case ErrorCode::AlphaMismatch: return "AlphaMismatch";
    case ErrorCode::WeightNormViolation: return "WeightNormViolation";
    case ErrorCode::NotAComponent: return "NotAComponent";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::InvalidFlow: return "InvalidFlow";
    case ErrorCode::InvalidCocycle: return "InvalidCocycle";
    case ErrorCode::NotATorusIndex: return "NotATorusIndex";
    case ErrorCode::FullSupportViolation: return "FullSupportViolation";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::InvarianceViolation: return "InvarianceViolation";
    case ErrorCode::ZeroKernelSheet: return "ZeroKernelSheet";
    case ErrorCode::NotMeasurePreserving: return "NotMeasurePreserving";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NonPositiveThreshold: return "NonPositiveThreshold";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingLabel: return "DanglingLabel";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

/// Library error. `subject()` names the offending label, direction or field
/// when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject)
      : std::runtime_error(std::string(error_name(code)) +
                           (subject.empty() ? "" : ": " + subject)),
        code_(code),
        subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace stabledecomp
