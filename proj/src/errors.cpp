#include "wavecollapse/errors.hpp"

namespace wavecollapse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGrid: return "invalid-grid";
    case ErrorCode::kGridTooCoarse: return "grid-too-coarse";
    case ErrorCode::kSupportClipped: return "support-clipped";
    case ErrorCode::kZeroNorm: return "zero-norm";
    case ErrorCode::kNodeSingularity: return "node-singularity";
    case ErrorCode::kBranchViolation: return "branch-violation";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kSmallN: return "small-n";
    case ErrorCode::kInsufficientStatistics: return "insufficient-statistics";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace wavecollapse
