#pragma once

#include <stdexcept>
#include <string>

namespace am {

enum class ErrorCode {
  Parse,
  Mode,
  Duplicate,
  Unavailable,
  Domain,
  Coverage,
  Shape,
  Singularity,
  DegenerateVariance,
  Normalization,
  Precondition,
  State,
  Sequencing,
  Label,
  Exhaustion,
  NoEstimate,
  Conflict,
  Validation,
  NotFound,
  Io,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace am
