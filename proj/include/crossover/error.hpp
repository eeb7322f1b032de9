#pragma once

#include <stdexcept>
#include <string>

namespace crossover {

enum class ErrorCode {
  kInvalidPlan,
  kInvalidSegment,
  kCorruptSegment,
  kInvalidWorld,
  kTopologyFailure,
  kUnsupportedTopology,
  kCorruptState,
  kInvalidInput,
  kDivergedState,
  kInvalidGroup,
  kInvalidMethod,
  kUsage,
  kIo,
};

const char* to_string(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a code, so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crossover
