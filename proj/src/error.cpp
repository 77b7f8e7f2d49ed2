#include "error.hpp"

namespace leadtime {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNegativeMass: return "NegativeMass";
    case ErrorCode::kBadLength: return "BadLength";
    case ErrorCode::kSumOutOfTolerance: return "SumOutOfTolerance";
    case ErrorCode::kThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMixedMetrics: return "MixedMetrics";
    case ErrorCode::kUnsortedDates: return "UnsortedDates";
    case ErrorCode::kDuplicateDates: return "DuplicateDates";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDegenerateMass: return "DegenerateMass";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kTooFewExceedances: return "TooFewExceedances";
    case ErrorCode::kAllStagesFailed: return "AllStagesFailed";
    case ErrorCode::kBasisTooSmall: return "BasisTooSmall";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kMissingStageOutput: return "MissingStageOutput";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kNonMonotoneCdf: return "NonMonotoneCdf";
  }
  return "Unknown";
}

}  // namespace leadtime
