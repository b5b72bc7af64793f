#pragma once

#include <Eigen/Dense>
#include <array>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "multishape/mask.hpp"

namespace multishape {

inline constexpr int kDefaultRayCount = 360;
inline constexpr double kDefaultVarianceThreshold = 0.995;

/// K radial boundary distances around a centroid. Entry k belongs to the ray at
/// angle 2*pi*k/K, counter-clockwise from +x.
struct ShapeVector {
  Eigen::VectorXd radii;

  ShapeVector() = default;
  explicit ShapeVector(Eigen::VectorXd r) : radii(std::move(r)) {}

  int size() const { return static_cast<int>(radii.size()); }
  double operator[](int k) const { return radii[k]; }
};

/// Ray angle of index k among `ray_count` evenly spaced rays.
double ray_angle(int k, int ray_count);

/// Measures the farthest foreground-to-background transition along each of
/// `ray_count` rays, stepping 0.5 px until the ray leaves the image. Each radius
/// is the midpoint between the last foreground step and the next one.
/// Throws kCentroidOutsideMask when the centroid pixel is background.
ShapeVector sample_shape_vector(const BinaryMask& mask, Point centroid,
                                int ray_count = kDefaultRayCount);

/// Pixel hit by the last foreground step of each ray (same geometry as
/// sample_shape_vector).
std::vector<std::array<int, 2>> sample_boundary_pixels(const BinaryMask& mask, Point centroid,
                                                       int ray_count = kDefaultRayCount);

struct ShapeExample {
  std::string scene_id;
  int object_id = 0;
  ShapeVector shape;
};

struct WeightedExampleSet {
  std::vector<ShapeExample> examples;
  std::vector<double> weights;
  double step = 0.1;

  /// All weights set to 1.
  static WeightedExampleSet uniform(std::vector<ShapeExample> examples, double step = 0.1);

  std::size_t size() const { return examples.size(); }
  /// Throws when weights and examples disagree or examples differ in K.
  void validate() const;
};

/// Weighted mean sum(w s) / sum(w).
ShapeVector weighted_mean(const WeightedExampleSet& set);

/// Unweighted scatter of deviations from `mean`, divided by the example count.
/// Weights only act through `mean`.
Eigen::MatrixXd covariance(const WeightedExampleSet& set, const ShapeVector& mean);

/// The shape-hypothesis space { mean + basis * x }.
struct ShapeModel {
  int k = 0;
  int t = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;        // k x t, orthonormal columns
  Eigen::VectorXd eigenvalues;  // t entries, non-increasing
  double variance_fraction = 0.0;
  std::vector<double> weights;

  Eigen::VectorXd coefficient_sigmas() const { return eigenvalues.array().sqrt(); }
};

/// Smallest t whose cumulative eigenvalue fraction is strictly above
/// `threshold`; eigenvalues must be sorted non-increasing and non-negative.
/// Never selects eigenvalues at or below the numerical-zero tolerance.
int select_component_count(std::span<const double> eigenvalues, double threshold);

/// Eigen-decomposes the covariance and keeps the leading t components.
/// Column signs are fixed so that each column's largest-magnitude entry is
/// positive. Throws kRankDeficient when every eigenvalue is <= 1e-12.
ShapeModel build_model(const WeightedExampleSet& set,
                       double variance_threshold = kDefaultVarianceThreshold);

struct SynthesisLimits {
  double radius_floor = 1.0;
  /// Coefficients are clamped to +-box_sigmas * sqrt(lambda_j).
  double box_sigmas = 3.0;
};

Eigen::VectorXd clamp_coefficients(const ShapeModel& model, const Eigen::VectorXd& x,
                                   const SynthesisLimits& limits = {});

/// mean + basis * clamp(x), floored at limits.radius_floor.
ShapeVector synthesize(const ShapeModel& model, const Eigen::VectorXd& x,
                       const SynthesisLimits& limits = {});

nlohmann::json to_json(const ShapeModel& model);
ShapeModel model_from_json(const nlohmann::json& doc);

std::string serialize_model(const ShapeModel& model);
ShapeModel parse_model(const std::string& text);

}  // namespace multishape
