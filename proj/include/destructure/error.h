#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace destructure {

enum class ErrorCode {
  kParse,
  kNoSections,
  kEmptySection,
  kNoCandidates,
  kTooFewSentences,
  kDimensionMismatch,
  kRemoteUnavailable,
  kContractViolation,
  kIdSetMismatch,
  kIo,
  kExperimentFailed,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace destructure
