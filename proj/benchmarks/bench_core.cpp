#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "multishape/evolution.hpp"
#include "multishape/raster.hpp"
#include "multishape/shape_model.hpp"
#include "multishape/synthgen.hpp"
#include "multishape/trust_region.hpp"

namespace ms = multishape;

namespace {

struct Fixture {
  ms::GeneratorConfig config;
  ms::GeneratedScene scene;
  ms::ShapeModel model;
  std::vector<ms::Alignment> alignments;

  explicit Fixture(int objects) {
    config.n_objects_min = config.n_objects_max = objects;
    scene = ms::generate_scene(config, 0);
    std::vector<ms::ShapeExample> ex;
    for (std::uint64_t i = 100; ex.size() < 100; ++i) {
      const auto g = ms::generate_scene(config, i);
      for (std::size_t j = 0; j < g.shapes.size(); ++j) {
        ex.push_back({g.scene.id, static_cast<int>(j), g.shapes[j]});
      }
    }
    model = ms::build_model(ms::WeightedExampleSet::uniform(std::move(ex)));
    const ms::ShapeVector mean(model.mean);
    for (const auto& c : scene.scene.centroids) {
      alignments.push_back(ms::align(mean, c, scene.scene.clump));
    }
  }
};

const Fixture& fixture(int objects) {
  static const Fixture one(1), two(2), four(4);
  return objects == 1 ? one : objects == 2 ? two : four;
}

void BM_Rasterize(benchmark::State& state) {
  const auto& f = fixture(1);
  const auto& s = f.scene.shapes[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ms::rasterize(s, f.scene.scene.centroids[0], {1.05, 0.3}, f.scene.scene.dims()));
  }
}
BENCHMARK(BM_Rasterize);

void BM_Align(benchmark::State& state) {
  const auto& f = fixture(2);
  const ms::ShapeVector mean(f.model.mean);
  const ms::Aligner aligner(f.scene.scene.clump, {}, f.model.k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aligner(mean, f.scene.scene.centroids[0]));
  }
}
BENCHMARK(BM_Align);

void BM_Energy(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  const ms::EnergyFunction energy(f.scene.scene, f.model, f.alignments);
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(energy.dimension(), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(energy(z));
}
BENCHMARK(BM_Energy)->Arg(1)->Arg(2)->Arg(4);

void BM_GradientFd(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  const Eigen::VectorXd z =
      Eigen::VectorXd::Constant(f.scene.scene.object_count() * f.model.t, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ms::gradient_fd(f.scene.scene, f.model, z, f.alignments, 0.3));
  }
  state.counters["dim"] = static_cast<double>(z.size());
}
BENCHMARK(BM_GradientFd)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_TrustRegionStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n * n; ++i) a.data()[i] = normal(rng);
  const Eigen::MatrixXd h = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g(n);
  for (auto& v : g) v = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ms::trust_region_step(g, h, 0.5));
}
BENCHMARK(BM_TrustRegionStep)->Arg(5)->Arg(30)->Arg(120);

void BM_BuildModel(benchmark::State& state) {
  ms::GeneratorConfig config;
  std::vector<ms::ShapeExample> ex;
  for (std::uint64_t i = 0; static_cast<int>(ex.size()) < state.range(0); ++i) {
    const auto g = ms::generate_scene(config, i);
    for (std::size_t j = 0; j < g.shapes.size(); ++j) {
      ex.push_back({g.scene.id, static_cast<int>(j), g.shapes[j]});
    }
  }
  const auto set = ms::WeightedExampleSet::uniform(std::move(ex));
  for (auto _ : state) benchmark::DoNotOptimize(ms::build_model(set));
}
BENCHMARK(BM_BuildModel)->Arg(50)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
