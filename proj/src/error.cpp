#include "crossover/error.hpp"

namespace crossover {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPlan: return "invalid-plan";
    case ErrorCode::kInvalidSegment: return "invalid-segment";
    case ErrorCode::kCorruptSegment: return "corrupt-segment";
    case ErrorCode::kInvalidWorld: return "invalid-world";
    case ErrorCode::kTopologyFailure: return "topology-failure";
    case ErrorCode::kUnsupportedTopology: return "unsupported-topology";
    case ErrorCode::kCorruptState: return "corrupt-state";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDivergedState: return "diverged-state";
    case ErrorCode::kInvalidGroup: return "invalid-group";
    case ErrorCode::kInvalidMethod: return "invalid-method";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace crossover
