#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace headalign {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateAttitude,
  kInsufficientData,
  kAlignmentWindow,
  kDegenerateGeometry,
  kAmbiguousAttitude,
  kShape,
  kParse,
  kIo,
  kNonFinite,
  kUsage,
  kMissingCheckpoint,
};

/// Machine-readable identifier, e.g. "degenerate-geometry".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace headalign
