#include "headalign/error.hpp"

namespace headalign {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateAttitude: return "degenerate-attitude";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kAlignmentWindow: return "alignment-window";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kAmbiguousAttitude: return "ambiguous-attitude";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kMissingCheckpoint: return "missing-checkpoint";
  }
  return "unknown";
}

}  // namespace headalign
