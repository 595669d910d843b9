#include "destructure/error.h"

namespace destructure {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kNoSections: return "NoSections";
    case ErrorCode::kEmptySection: return "EmptySection";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kTooFewSentences: return "TooFewSentences";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::kContractViolation: return "ContractViolation";
    case ErrorCode::kIdSetMismatch: return "IdSetMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kExperimentFailed: return "ExperimentFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace destructure
