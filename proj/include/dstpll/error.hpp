#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dstpll {

enum class ErrorCode {
  // evidence
  EmptyFocalSet,
  MassNotNormalized,
  DuplicateFocalSet,
  NonPositiveMass,
  UniverseMismatch,
  EmptySourceList,
  CombinatorialBlowup,
  // neighbors
  EmptyInput,
  NonFiniteFeature,
  KTooLarge,
  DimensionMismatch,
  // pll
  EmptyCandidateSet,
  InvalidParameter,
  // datagen
  ParseError,
  TruthNotInCandidates,
  RTooLarge,
  TooManyFolds,
  Io,
  // metrics
  LengthMismatch,
  BetaOutOfRange,
  TruthMissing,
  // oracle
  BudgetExceeded,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyFocalSet: return "EmptyFocalSet";
    case ErrorCode::MassNotNormalized: return "MassNotNormalized";
    case ErrorCode::DuplicateFocalSet: return "DuplicateFocalSet";
    case ErrorCode::NonPositiveMass: return "NonPositiveMass";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::EmptySourceList: return "EmptySourceList";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TruthNotInCandidates: return "TruthNotInCandidates";
    case ErrorCode::RTooLarge: return "RTooLarge";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::Io: return "Io";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::TruthMissing: return "TruthMissing";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dstpll
