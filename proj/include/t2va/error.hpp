// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t2va {

enum class ErrorCode {
  kEmptyPrompt,
  kIndexOutOfBounds,
  kDeletionOfOnlyToken,
  kInvalidEdit,
  kInapplicableKind,
  kDimensionMismatch,
  kFileNotFound,
  kEmptyVocabulary,
  kSampleTooLarge,
  kTransport,
  kMalformedResponse,
  kNegativeScore,
  kCapabilityMissing,
  kPromptTooShort,
  kStealthViolation,
  kScheduleInfeasible,
  kInvalidConfig,
  kMalformedTrace,
  kMissingBaseline,
  kKTooLarge,
  kMissingCell,
  kInsufficientCandidates,
  kIoFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyPrompt: return "EmptyPrompt";
    case ErrorCode::kIndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::kDeletionOfOnlyToken: return "DeletionOfOnlyToken";
    case ErrorCode::kInvalidEdit: return "InvalidEdit";
    case ErrorCode::kInapplicableKind: return "InapplicableKind";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kSampleTooLarge: return "SampleTooLarge";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kNegativeScore: return "NegativeScore";
    case ErrorCode::kCapabilityMissing: return "CapabilityMissing";
    case ErrorCode::kPromptTooShort: return "PromptTooShort";
    case ErrorCode::kStealthViolation: return "StealthViolation";
    case ErrorCode::kScheduleInfeasible: return "ScheduleInfeasible";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kMalformedTrace: return "MalformedTrace";
    case ErrorCode::kMissingBaseline: return "MissingBaseline";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kInsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace t2va
