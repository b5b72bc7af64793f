#include "multishape/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <system_error>

#include "multishape/error.hpp"
#include "multishape/netpbm.hpp"
#include "multishape/raster.hpp"

namespace multishape {

namespace fs = std::filesystem;

void GeneratorConfig::validate() const {
  const bool ordered = n_objects_min >= 1 && n_objects_max >= n_objects_min &&
                       base_radius_min > 0.0 && base_radius_max >= base_radius_min &&
                       eccentricity_min >= 1.0 && eccentricity_max >= eccentricity_min &&
                       boundary_noise_amplitude >= 0.0 && boundary_noise_amplitude < 1.0 &&
                       harmonics >= 0 && centroid_spacing_min > 0.0 &&
                       centroid_spacing_max >= centroid_spacing_min && ray_count >= 3;
  if (!ordered) {
    throw Error(ErrorCode::kInvalidArgument, "generator ranges must be positive and ordered");
  }
  const double needed = 2.0 * base_radius_max * eccentricity_max;
  if (width < needed || height < needed) {
    throw Error(ErrorCode::kCanvasTooSmall,
                "canvas " + std::to_string(width) + "x" + std::to_string(height) +
                    " cannot hold objects of extent " + std::to_string(needed));
  }
}

nlohmann::json GeneratorConfig::to_json() const {
  return {{"seed", seed},
          {"n_objects_min", n_objects_min},
          {"n_objects_max", n_objects_max},
          {"base_radius_min", base_radius_min},
          {"base_radius_max", base_radius_max},
          {"eccentricity_min", eccentricity_min},
          {"eccentricity_max", eccentricity_max},
          {"boundary_noise_amplitude", boundary_noise_amplitude},
          {"harmonics", harmonics},
          {"centroid_spacing_min", centroid_spacing_min},
          {"centroid_spacing_max", centroid_spacing_max},
          {"width", width},
          {"height", height},
          {"ray_count", ray_count}};
}

namespace {

constexpr int kPlacementAttempts = 200;
constexpr int kAnglesPerObject = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Portable draws: std::*_distribution output is implementation-defined.
class Draw {
 public:
  Draw(std::uint64_t seed, std::uint64_t index)
      : rng_(splitmix64(seed ^ splitmix64(index + 0x5851F42D4C957F2DULL))) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 rng_;
};

struct ObjectSpec {
  double radius = 0.0;
  ShapeVector shape;
  double extent = 0.0;
};

ObjectSpec make_object(const GeneratorConfig& cfg, Draw& draw) {
  const double radius = draw.uniform(cfg.base_radius_min, cfg.base_radius_max);
  const double ecc = draw.uniform(cfg.eccentricity_min, cfg.eccentricity_max);
  const double orientation = draw.uniform(0.0, std::numbers::pi);
  const double major = radius * std::sqrt(ecc);
  const double minor = radius / std::sqrt(ecc);
  std::vector<double> amp(static_cast<std::size_t>(cfg.harmonics));
  std::vector<double> phase(static_cast<std::size_t>(cfg.harmonics));
  for (int h = 0; h < cfg.harmonics; ++h) {
    // Sum of |amp| stays within the configured fraction of the radius.
    amp[static_cast<std::size_t>(h)] =
        cfg.boundary_noise_amplitude * draw.uniform(-1.0, 1.0) / cfg.harmonics;
    phase[static_cast<std::size_t>(h)] = draw.uniform(0.0, 2.0 * std::numbers::pi);
  }
  Eigen::VectorXd radii(cfg.ray_count);
  for (int k = 0; k < cfg.ray_count; ++k) {
    const double a = ray_angle(k, cfg.ray_count);
    const double b = a - orientation;
    const double ellipse =
        major * minor / std::hypot(minor * std::cos(b), major * std::sin(b));
    double perturb = 1.0;
    for (int h = 0; h < cfg.harmonics; ++h) {
      perturb += amp[static_cast<std::size_t>(h)] *
                 std::cos((h + 2) * a + phase[static_cast<std::size_t>(h)]);
    }
    radii[k] = ellipse * perturb;
  }
  ObjectSpec spec;
  spec.radius = radius;
  spec.extent = radii.maxCoeff();
  spec.shape = ShapeVector(std::move(radii));
  return spec;
}

}  // namespace

GeneratedScene generate_scene(const GeneratorConfig& config, std::uint64_t index) {
  config.validate();
  Draw draw(config.seed, index);
  const int n = draw.integer(config.n_objects_min, config.n_objects_max);
  std::vector<ObjectSpec> objects;
  for (int i = 0; i < n; ++i) objects.push_back(make_object(config, draw));

  const Dims dims{config.width, config.height};
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    // Chain placement: each object sits at `spacing * mean radius` from a
    // random earlier object and no closer than that to any other.
    std::vector<Point> centers{{0.0, 0.0}};
    bool placed = true;
    for (int i = 1; i < n && placed; ++i) {
      placed = false;
      const double spacing = draw.uniform(config.centroid_spacing_min, config.centroid_spacing_max);
      const int anchor = draw.integer(0, i - 1);
      const auto& a = objects[static_cast<std::size_t>(anchor)];
      const auto& o = objects[static_cast<std::size_t>(i)];
      const double distance = spacing * 0.5 * (a.radius + o.radius);
      for (int t = 0; t < kAnglesPerObject; ++t) {
        const double angle = draw.uniform(0.0, 2.0 * std::numbers::pi);
        const Point c{centers[static_cast<std::size_t>(anchor)].x + distance * std::cos(angle),
                      centers[static_cast<std::size_t>(anchor)].y + distance * std::sin(angle)};
        bool clear = true;
        for (int m = 0; m < i && clear; ++m) {
          if (m == anchor) continue;
          const double need =
              spacing * 0.5 * (objects[static_cast<std::size_t>(m)].radius + o.radius);
          clear = std::hypot(c.x - centers[static_cast<std::size_t>(m)].x,
                             c.y - centers[static_cast<std::size_t>(m)].y) >= need;
        }
        if (clear) {
          centers.push_back(c);
          placed = true;
          break;
        }
      }
    }
    if (!placed) continue;

    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (int i = 0; i < n; ++i) {
      const double e = objects[static_cast<std::size_t>(i)].extent;
      lo_x = std::min(lo_x, centers[static_cast<std::size_t>(i)].x - e);
      hi_x = std::max(hi_x, centers[static_cast<std::size_t>(i)].x + e);
      lo_y = std::min(lo_y, centers[static_cast<std::size_t>(i)].y - e);
      hi_y = std::max(hi_y, centers[static_cast<std::size_t>(i)].y + e);
    }
    // One pixel of margin keeps every boundary inside the canvas.
    if (hi_x - lo_x > config.width - 2.0 || hi_y - lo_y > config.height - 2.0) continue;
    const double shift_x = 0.5 * config.width - 0.5 * (lo_x + hi_x);
    const double shift_y = 0.5 * config.height - 0.5 * (lo_y + hi_y);

    GeneratedScene out;
    char id[32];
    std::snprintf(id, sizeof id, "scene_%04llu", static_cast<unsigned long long>(index));
    out.scene.id = id;
    for (int i = 0; i < n; ++i) {
      const Point c{centers[static_cast<std::size_t>(i)].x + shift_x,
                    centers[static_cast<std::size_t>(i)].y + shift_y};
      out.scene.centroids.push_back(c);
      out.scene.truth.push_back(
          rasterize(objects[static_cast<std::size_t>(i)].shape, c, Alignment{}, dims));
      out.shapes.push_back(objects[static_cast<std::size_t>(i)].shape);
    }
    out.scene.clump = union_masks(out.scene.truth);
    out.scene.validate();
    return out;
  }
  throw Error(ErrorCode::kCanvasTooSmall,
              "could not place " + std::to_string(n) + " objects on the canvas");
}

void write_scene(const ClumpScene& scene, const fs::path& dir, const nlohmann::json& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  write_pgm(dir / "clump.pgm", scene.clump);
  for (std::size_t i = 0; i < scene.truth.size(); ++i) {
    write_pgm(dir / ("truth_" + std::to_string(i) + ".pgm"), scene.truth[i]);
  }
  nlohmann::json centroids = nlohmann::json::array();
  for (const auto& c : scene.centroids) centroids.push_back({c.x, c.y});
  nlohmann::json doc{{"format", 1},
                     {"id", scene.id},
                     {"width", scene.clump.width()},
                     {"height", scene.clump.height()},
                     {"centroids", std::move(centroids)},
                     {"truth_count", scene.truth.size()},
                     {"generator", provenance}};
  write_file_atomic(dir / "scene.json", doc.dump(1) + "\n");
}

ClumpScene read_scene(const fs::path& dir) {
  const fs::path manifest = dir / "scene.json";
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, manifest.string() + ": " + e.what());
  }
  ClumpScene scene;
  std::size_t truth_count = 0;
  try {
    if (doc.at("format").get<int>() != 1) {
      throw Error(ErrorCode::kIoError, manifest.string() + ": unsupported format");
    }
    scene.id = doc.at("id").get<std::string>();
    for (const auto& c : doc.at("centroids")) {
      scene.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    }
    truth_count = doc.value("truth_count", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, manifest.string() + ": " + e.what());
  }
  scene.clump = read_pgm(dir / "clump.pgm");

  std::size_t files = 0;
  while (fs::exists(dir / ("truth_" + std::to_string(files) + ".pgm"))) ++files;
  if (files != truth_count || (files != 0 && files != scene.centroids.size())) {
    throw Error(ErrorCode::kManifestMismatch,
                dir.string() + ": " + std::to_string(scene.centroids.size()) + " centroids, " +
                    std::to_string(files) + " truth files, manifest declares " +
                    std::to_string(truth_count));
  }
  for (std::size_t i = 0; i < files; ++i) {
    scene.truth.push_back(read_pgm(dir / ("truth_" + std::to_string(i) + ".pgm")));
  }
  if (doc.contains("width") && doc.contains("height") &&
      (doc["width"].get<int>() != scene.clump.width() ||
       doc["height"].get<int>() != scene.clump.height())) {
    throw Error(ErrorCode::kManifestMismatch, dir.string() + ": clump dims differ from manifest");
  }
  return scene;
}

void export_dataset(std::span<const ClumpScene> scenes, const fs::path& dir) {
  for (const auto& s : scenes) write_scene(s, dir / s.id);
}

std::vector<ClumpScene> import_dataset(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "dataset directory " + dir.string() + " is not readable");
  }
  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "scene.json")) {
      scene_dirs.push_back(entry.path());
    }
  }
  std::sort(scene_dirs.begin(), scene_dirs.end());
  std::vector<ClumpScene> scenes;
  for (const auto& d : scene_dirs) scenes.push_back(read_scene(d));
  return scenes;
}

}  // namespace multishape
