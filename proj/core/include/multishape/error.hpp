#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace multishape {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kCentroidOutsideMask,
  kDegenerateMask,
  kEmptyExampleSet,
  kRankDeficient,
  kEmptyInput,
  kZeroGradient,
  kEmptyDataset,
  kEmptyTruth,
  kCanvasTooSmall,
  kIoError,
  kManifestMismatch,
};

/// Stable lower_snake name of an error code, used in CLI error prefixes.
std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace multishape
