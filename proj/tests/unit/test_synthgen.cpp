#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "expect_error.hpp"
#include "multishape/metrics.hpp"
#include "multishape/netpbm.hpp"
#include "multishape/raster.hpp"
#include "multishape/synthgen.hpp"
#include "scratch_dir.hpp"

namespace ms = multishape;
namespace mt = multishape::testing;
namespace fs = std::filesystem;

namespace {

void expect_same_scene(const ms::ClumpScene& a, const ms::ClumpScene& b) {
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.clump, b.clump);
  EXPECT_EQ(a.centroids, b.centroids);
  ASSERT_EQ(a.truth.size(), b.truth.size());
  for (std::size_t i = 0; i < a.truth.size(); ++i) EXPECT_EQ(a.truth[i], b.truth[i]) << i;
}

}  // namespace

TEST(Generator, DeterministicInSeedAndIndex) {
  ms::GeneratorConfig cfg;
  const auto a = ms::generate_scene(cfg, 3);
  const auto b = ms::generate_scene(cfg, 3);
  expect_same_scene(a.scene, b.scene);
  for (std::size_t i = 0; i < a.shapes.size(); ++i) {
    EXPECT_EQ(a.shapes[i].radii, b.shapes[i].radii);
  }
  const auto other = ms::generate_scene(cfg, 4);
  EXPECT_FALSE(other.scene.clump == a.scene.clump);
  cfg.seed = 8;
  EXPECT_FALSE(ms::generate_scene(cfg, 3).scene.clump == a.scene.clump);
}

TEST(Generator, ScenesSatisfyStructuralInvariants) {
  const ms::GeneratorConfig cfg;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto g = ms::generate_scene(cfg, i);
    const auto& s = g.scene;
    ASSERT_GE(s.object_count(), cfg.n_objects_min);
    ASSERT_LE(s.object_count(), cfg.n_objects_max);
    EXPECT_EQ(s.truth.size(), s.centroids.size());
    EXPECT_EQ(g.shapes.size(), s.centroids.size());
    EXPECT_EQ(s.clump, ms::union_masks(s.truth));
    EXPECT_EQ(s.dims(), (ms::Dims{cfg.width, cfg.height}));
    for (std::size_t k = 0; k < s.centroids.size(); ++k) {
      const auto& c = s.centroids[k];
      const int x = static_cast<int>(std::floor(c.x));
      const int y = static_cast<int>(std::floor(c.y));
      EXPECT_TRUE(s.clump.at(x, y)) << "scene " << i << " object " << k;
      EXPECT_TRUE(s.truth[k].at(x, y)) << "scene " << i << " object " << k;
      EXPECT_EQ(g.shapes[k].size(), cfg.ray_count);
    }
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Generator, WideSpacingGivesDisjointObjects) {
  ms::GeneratorConfig cfg;
  cfg.centroid_spacing_min = 10.0;
  cfg.centroid_spacing_max = 10.0;
  cfg.n_objects_min = 2;
  cfg.n_objects_max = 3;
  cfg.base_radius_min = 8.0;
  cfg.base_radius_max = 10.0;
  cfg.width = 512;
  cfg.height = 512;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto s = ms::generate_scene(cfg, i).scene;
    for (std::size_t a = 0; a < s.truth.size(); ++a) {
      for (std::size_t b = a + 1; b < s.truth.size(); ++b) {
        EXPECT_EQ(ms::intersection_count(s.truth[a], s.truth[b]), 0u);
      }
    }
  }
}

TEST(Generator, OverlapShrinksAsSpacingGrows) {
  double previous = 2.0;
  for (double spacing : {0.6, 1.0, 1.5, 4.0}) {
    ms::GeneratorConfig cfg;
    cfg.centroid_spacing_min = spacing;
    cfg.centroid_spacing_max = spacing;
    cfg.n_objects_min = cfg.n_objects_max = 2;
    cfg.width = cfg.height = 600;
    double total = 0.0;
    int n = 0;
    for (std::uint64_t i = 0; i < 30; ++i) {
      const auto s = ms::generate_scene(cfg, i).scene;
      for (std::size_t k = 0; k < 2; ++k) {
        const std::vector<ms::BinaryMask> others{s.truth[1 - k]};
        total += ms::overlapping_degree(s.truth[k], others, s.centroids[k]);
        ++n;
      }
    }
    const double mean = total / n;
    EXPECT_LE(mean, previous) << "spacing " << spacing;
    previous = mean;
  }
  EXPECT_EQ(previous, 0.0);
}

TEST(Generator, RegeneratedShapesAreRepresentable) {
  // Re-sampling a truth mask and filling the sampled polygon recovers it.
  const ms::GeneratorConfig cfg;
  int objects = 0;
  for (std::uint64_t i = 0; objects < 100; ++i) {
    const auto s = ms::generate_scene(cfg, i).scene;
    for (std::size_t k = 0; k < s.truth.size() && objects < 100; ++k, ++objects) {
      const auto v = ms::sample_shape_vector(s.truth[k], s.centroids[k], cfg.ray_count);
      const auto back = ms::rasterize(v, s.centroids[k], ms::Alignment{}, s.dims());
      EXPECT_GE(ms::dsc(back, s.truth[k]), 0.97) << "scene " << i << " object " << k;
    }
  }
}

TEST(Generator, RejectsBadConfig) {
  ms::GeneratorConfig cfg;
  cfg.width = 100;
  EXPECT_ERROR_CODE(cfg.validate(), ms::ErrorCode::kCanvasTooSmall);
  EXPECT_ERROR_CODE(ms::generate_scene(cfg, 0), ms::ErrorCode::kCanvasTooSmall);
  cfg = {};
  cfg.n_objects_min = 4;
  cfg.n_objects_max = 3;
  EXPECT_ERROR_CODE(cfg.validate(), ms::ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.eccentricity_min = 0.5;
  EXPECT_ERROR_CODE(cfg.validate(), ms::ErrorCode::kInvalidArgument);
}

TEST(Generator, CrowdedCanvasFailsToPlace) {
  ms::GeneratorConfig cfg;
  cfg.n_objects_min = cfg.n_objects_max = 30;
  cfg.centroid_spacing_min = cfg.centroid_spacing_max = 3.0;
  cfg.width = cfg.height = 160;
  EXPECT_ERROR_CODE(ms::generate_scene(cfg, 0), ms::ErrorCode::kCanvasTooSmall);
}

TEST(SceneIo, DatasetRoundTrip) {
  mt::ScratchDir dir;
  const ms::GeneratorConfig cfg;
  std::vector<ms::ClumpScene> scenes;
  for (std::uint64_t i = 0; i < 10; ++i) scenes.push_back(ms::generate_scene(cfg, i).scene);
  ms::export_dataset(scenes, dir.path());
  const auto back = ms::import_dataset(dir.path());
  ASSERT_EQ(back.size(), scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) expect_same_scene(back[i], scenes[i]);
}

TEST(SceneIo, ManifestTruthCountMismatch) {
  mt::ScratchDir dir;
  ms::GeneratorConfig cfg;
  cfg.n_objects_min = cfg.n_objects_max = 3;
  const auto s = ms::generate_scene(cfg, 0).scene;
  ms::write_scene(s, dir.path());
  fs::remove(dir / "truth_2.pgm");
  EXPECT_ERROR_CODE(ms::read_scene(dir.path()), ms::ErrorCode::kManifestMismatch);
}

TEST(SceneIo, MissingClumpNamesThePath) {
  mt::ScratchDir dir;
  const auto s = ms::generate_scene(ms::GeneratorConfig{}, 0).scene;
  ms::write_scene(s, dir.path());
  fs::remove(dir / "clump.pgm");
  try {
    ms::read_scene(dir.path());
    FAIL() << "expected an error";
  } catch (const ms::Error& e) {
    EXPECT_EQ(e.code(), ms::ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("clump.pgm"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, MalformedManifest) {
  mt::ScratchDir dir;
  const auto s = ms::generate_scene(ms::GeneratorConfig{}, 0).scene;
  ms::write_scene(s, dir.path());
  std::ofstream(dir / "scene.json") << "{\"format\": 1, \"id\": ";
  EXPECT_ERROR_CODE(ms::read_scene(dir.path()), ms::ErrorCode::kIoError);
}

TEST(SceneIo, MissingDatasetDirectory) {
  EXPECT_ERROR_CODE(ms::import_dataset("/nonexistent/multishape/dataset"),
                    ms::ErrorCode::kIoError);
}
