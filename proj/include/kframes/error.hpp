#pragma once

#include <stdexcept>
#include <string>

namespace kframes {

enum class ErrorCode {
  InvalidTimeline,
  InvalidInput,
  Dimension,
  InsufficientFrames,
  InsufficientData,
  InvalidBudget,
  OverBudget,
  NoClips,
  InsufficientCandidates,
  Parse,
  Validation,
  Config,
  Transport,
  RateLimited,
  Provider,
};

const char* to_string(ErrorCode code) noexcept;

/// Domain error carrying a machine-readable code. The CLI maps every
/// Error to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kframes
