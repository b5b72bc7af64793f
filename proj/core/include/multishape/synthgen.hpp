#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "multishape/evolution.hpp"
#include "multishape/shape_model.hpp"

namespace multishape {

/// Synthetic overlapping-object scenes: harmonically perturbed ellipses.
struct GeneratorConfig {
  std::uint64_t seed = 7;
  int n_objects_min = 2;
  int n_objects_max = 6;
  double base_radius_min = 20.0;  // geometric-mean semi-axis, px
  double base_radius_max = 40.0;
  double eccentricity_min = 1.0;  // major / minor axis ratio
  double eccentricity_max = 2.0;
  double boundary_noise_amplitude = 0.08;  // fraction of radius
  int harmonics = 6;
  double centroid_spacing_min = 0.8;  // multiple of the pair's mean radius
  double centroid_spacing_max = 1.6;
  int width = 256;
  int height = 256;
  int ray_count = kDefaultRayCount;

  /// Throws kInvalidArgument for unordered ranges and kCanvasTooSmall when the
  /// canvas cannot hold the largest possible object.
  void validate() const;
  nlohmann::json to_json() const;
};

struct GeneratedScene {
  ClumpScene scene;                 // truth filled; clump = union of truth
  std::vector<ShapeVector> shapes;  // generating shape vector of each object
};

/// Deterministic in (config.seed, index).
GeneratedScene generate_scene(const GeneratorConfig& config, std::uint64_t index);

/// Scene directory: clump.pgm, truth_<i>.pgm and scene.json (format 1).
void write_scene(const ClumpScene& scene, const std::filesystem::path& dir,
                 const nlohmann::json& provenance = nlohmann::json::object());
ClumpScene read_scene(const std::filesystem::path& dir);

/// One sub-directory per scene, named after the scene id.
void export_dataset(std::span<const ClumpScene> scenes, const std::filesystem::path& dir);
/// Reads every scene sub-directory (those holding scene.json) in name order.
std::vector<ClumpScene> import_dataset(const std::filesystem::path& dir);

}  // namespace multishape
