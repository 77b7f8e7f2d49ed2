#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leadtime {

// Numeric values are part of the C ABI (see leadtime.h); append only.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kNegativeMass = 2,
  kBadLength = 3,
  kSumOutOfTolerance = 4,
  kThresholdOutOfRange = 5,
  kEmptyInput = 6,
  kMixedMetrics = 7,
  kUnsortedDates = 8,
  kDuplicateDates = 9,
  kSeriesTooShort = 10,
  kInvalidConfig = 11,
  kDegenerateMass = 12,
  kDegenerateInput = 13,
  kTooFewExceedances = 14,
  kAllStagesFailed = 15,
  kBasisTooSmall = 16,
  kInvalidSpec = 17,
  kMissingStageOutput = 18,
  kIo = 19,
  kParse = 20,
  kNonMonotoneCdf = 21,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace leadtime
