#include "multishape/error.hpp"

namespace multishape {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kCentroidOutsideMask: return "centroid_outside_mask";
    case ErrorCode::kDegenerateMask: return "degenerate_mask";
    case ErrorCode::kEmptyExampleSet: return "empty_example_set";
    case ErrorCode::kRankDeficient: return "rank_deficient";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kZeroGradient: return "zero_gradient";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kEmptyTruth: return "empty_truth";
    case ErrorCode::kCanvasTooSmall: return "canvas_too_small";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kManifestMismatch: return "manifest_mismatch";
  }
  return "unknown";
}

}  // namespace multishape
