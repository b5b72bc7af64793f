#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "multishape/mask.hpp"
#include "multishape/shape_model.hpp"

namespace multishape {

/// TPR and TNR are computed on the union of objects. FNR sums per-object
/// misses, so pixels shared by overlapping truths are counted once per object
/// and TPR + FNR != 1 in overlapping scenes.
struct PixelMetrics {
  double tpr = 0.0;
  double tnr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

/// Predicted and truth lists pair up by index. Throws kEmptyTruth for an empty
/// truth list and kDimensionMismatch for length or size disagreements.
PixelMetrics pixel_metrics(std::span<const BinaryMask> predicted,
                           std::span<const BinaryMask> truth);

/// 2|A and B| / (|A| + |B|); 1.0 when both are empty.
double dsc(const BinaryMask& predicted, const BinaryMask& truth);

/// Fraction of the object's K radial boundary samples that fall inside the
/// union of the other objects' truth masks.
double overlapping_degree(const BinaryMask& object_truth, std::span<const BinaryMask> other_truths,
                          Point centroid, int ray_count = kDefaultRayCount);

inline constexpr int kDegreeBins = 4;

/// Quarter bins of the overlapping degree; 0 (isolated) joins bin 0 and a
/// fully occluded boundary (degree 1) joins bin 3.
int degree_bin(double degree);

struct ObjectScore {
  int object = 0;
  double dsc = 0.0;
  double degree = 0.0;
  int bin = 0;
  bool isolated = false;
};

struct SceneReport {
  std::string scene;
  PixelMetrics pixels;
  std::vector<ObjectScore> objects;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 below two values
};

Summary summarize(std::span<const double> values);

struct BinSummary {
  Summary dsc;
  std::size_t isolated = 0;
};

std::array<BinSummary, kDegreeBins> bin_by_degree(std::span<const ObjectScore> objects);

/// Scores one scene's predictions against its truths; degrees come from the
/// truths themselves.
SceneReport evaluate_scene(const std::string& scene_id, std::span<const BinaryMask> predicted,
                           std::span<const BinaryMask> truth, std::span<const Point> centroids,
                           int ray_count = kDefaultRayCount);

/// Per-scene values plus aggregate mean/std per metric and per degree bin.
nlohmann::json report_to_json(std::span<const SceneReport> scenes);
std::string report_to_csv(std::span<const SceneReport> scenes);

}  // namespace multishape
