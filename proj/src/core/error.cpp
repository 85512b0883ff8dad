#include "rssfp/error.hpp"

namespace rssfp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kNoOverlap: return "no-overlap";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kUnlocatable: return "unlocatable";
    case ErrorCode::kStaleState: return "stale-state";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace rssfp
