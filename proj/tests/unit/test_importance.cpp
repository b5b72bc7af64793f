#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "expect_error.hpp"
#include "multishape/importance.hpp"
#include "oracles.hpp"
#include "shapes.hpp"

namespace ms = multishape;
namespace mt = multishape::testing;

namespace {

constexpr int kRays = 90;

ms::TrainingPair make_pair(const std::string& id, const std::vector<ms::ShapeVector>& shapes,
                           const std::vector<ms::Point>& centroids, ms::Dims dims) {
  ms::TrainingPair p{mt::scene_from_shapes(shapes, centroids, dims), shapes};
  p.scene.id = id;
  return p;
}

// A disk pair followed by an ellipse pair, two objects each.
std::vector<ms::TrainingPair> two_family_toy() {
  return {
      make_pair("disk", {mt::circle(14.0, kRays), mt::circle(16.0, kRays)},
                {{40.3, 40.6}, {65.2, 41.1}}, {110, 80}),
      make_pair("ellipse", {mt::ellipse(22.0, 10.0, 0.3, kRays), mt::ellipse(20.0, 11.0, 1.3, kRays)},
                {{40.4, 39.7}, {70.1, 45.3}}, {110, 90}),
  };
}

ms::ShapeModel uniform_model(const std::vector<ms::TrainingPair>& data) {
  std::vector<ms::ShapeVector> shapes;
  for (const auto& p : data) shapes.insert(shapes.end(), p.shapes.begin(), p.shapes.end());
  return mt::model_from_shapes(shapes);
}

ms::LearningConfig fast_config() {
  ms::LearningConfig c;
  c.step = 0.5;
  c.max_tries_per_example = 4;
  c.max_cycles = 3;
  c.evolution.max_outer_iterations = 15;
  return c;
}

void expect_history_invariants(const ms::LearningResult& r, std::size_t examples,
                               const ms::LearningConfig& c) {
  ASSERT_EQ(r.weights.size(), examples);
  std::map<std::size_t, double> last;
  for (const auto& u : r.history) {
    EXPECT_LT(u.energy_after, u.energy_before);
    const double before = last.count(u.example) ? last[u.example] : 1.0;
    EXPECT_DOUBLE_EQ(u.weight, before + c.step);
    last[u.example] = u.weight;
  }
  for (std::size_t e = 0; e < examples; ++e) {
    EXPECT_GE(r.weights[e], 1.0);
    EXPECT_DOUBLE_EQ(r.weights[e], last.count(e) ? last[e] : 1.0);
  }
  EXPECT_LE(r.cycles, c.max_cycles);
  EXPECT_LE(r.tentative_evaluations,
            static_cast<long>(c.max_cycles) * static_cast<long>(examples) * c.max_tries_per_example);
  EXPECT_EQ(r.model.weights, r.weights);
}

}  // namespace

TEST(TerminatedEnergy, ZeroWhenTheMeanAlreadyMatches) {
  const auto a = mt::ellipse(20.0, 12.0, 0.0, kRays);
  const auto b = mt::ellipse(22.0, 10.0, 0.0, kRays);
  const auto model = mt::model_from_shapes({a, b});
  const ms::ShapeVector mean(model.mean);
  const auto pair = make_pair("ideal", {a, b}, {{40.3, 40.2}, {120.6, 40.1}}, {160, 80});
  ms::TrainingPair ideal = pair;
  ideal.scene = mt::scene_from_shapes({mean, mean}, pair.scene.centroids, {160, 80});
  EXPECT_EQ(ms::terminated_energy(ideal, model, {}), 0);
}

TEST(TerminatedEnergy, IsReproducible) {
  const auto pairs = two_family_toy();
  const auto model = uniform_model(pairs);
  const long e1 = ms::terminated_energy(pairs[1], model, {});
  const long e2 = ms::terminated_energy(pairs[1], model, {});
  EXPECT_EQ(e1, e2);
  EXPECT_GE(e1, 0);
}

TEST(TerminatedEnergy, RayCountMismatchIsAnError) {
  const auto pairs = two_family_toy();
  const auto model = mt::model_from_shapes(mt::ellipse_family(36));
  EXPECT_ERROR_CODE(ms::terminated_energy(pairs[0], model, {}), ms::ErrorCode::kDimensionMismatch);
}

TEST(Learn, NothingToLearnWhenEnergyIsAlreadyZero) {
  const auto a = mt::ellipse(20.0, 12.0, 0.0, kRays);
  const auto b = mt::ellipse(22.0, 10.0, 0.0, kRays);
  const ms::ShapeVector mean(mt::model_from_shapes({a, b}).mean);
  auto pair = make_pair("ideal", {a, b}, {{40.3, 40.2}, {120.6, 40.1}}, {160, 80});
  pair.scene = mt::scene_from_shapes({mean, mean}, pair.scene.centroids, {160, 80});
  const std::vector<ms::TrainingPair> data{pair};
  const auto r = ms::learn(data, fast_config());
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.weights, (std::vector<double>{1.0, 1.0}));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.cycles, 1);
}

TEST(Learn, TwoFamilyToyKeepsItsInvariants) {
  const auto data = two_family_toy();
  const auto config = fast_config();
  const auto r = ms::learn(data, config);
  expect_history_invariants(r, 4, config);

  const auto initial = uniform_model(data);
  ASSERT_FALSE(r.history.empty());
  const long before = ms::terminated_energy(data[0], initial, config.evolution);
  EXPECT_LE(ms::terminated_energy(data[0], r.model, config.evolution), before);
  if (r.history.front().scene_id == "disk" && r.history.front().cycle == 0) {
    EXPECT_EQ(r.history.front().energy_before, before);
  }
}

TEST(Learn, IsDeterministic) {
  const auto data = two_family_toy();
  const auto a = ms::learn(data, fast_config());
  const auto b = ms::learn(data, fast_config());
  EXPECT_EQ(a.weights, b.weights);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(ms::to_json(a.history[i]), ms::to_json(b.history[i]));
  }
  EXPECT_EQ(ms::serialize_model(a.model), ms::serialize_model(b.model));
}

TEST(Learn, ShuffledOrderIsSeedDeterministic) {
  const auto data = two_family_toy();
  auto config = fast_config();
  config.shuffle = true;
  config.seed = 42;
  config.max_cycles = 2;
  const auto a = ms::learn(data, config);
  const auto b = ms::learn(data, config);
  EXPECT_EQ(a.weights, b.weights);
  expect_history_invariants(a, 4, config);
}

TEST(Learn, RejectsBadInput) {
  EXPECT_ERROR_CODE(ms::learn({}, fast_config()), ms::ErrorCode::kEmptyDataset);
  auto config = fast_config();
  config.step = 0.0;
  const auto data = two_family_toy();
  EXPECT_ERROR_CODE(ms::learn(data, config), ms::ErrorCode::kInvalidArgument);
  config = fast_config();
  config.max_cycles = 0;
  EXPECT_ERROR_CODE(ms::learn(data, config), ms::ErrorCode::kInvalidArgument);
  auto broken = data;
  broken[0].shapes.clear();
  EXPECT_ERROR_CODE(ms::learn(broken, fast_config()), ms::ErrorCode::kManifestMismatch);
}

TEST(CollectExamples, FlattensInDatasetOrder) {
  const auto data = two_family_toy();
  const auto ex = ms::collect_examples(data);
  ASSERT_EQ(ex.size(), 4u);
  EXPECT_EQ(ex[0].scene_id, "disk");
  EXPECT_EQ(ex[1].object_id, 1);
  EXPECT_EQ(ex[2].scene_id, "ellipse");
  EXPECT_EQ(ex[2].object_id, 0);
}

TEST(WeightUpdateJson, CarriesEveryField) {
  const ms::WeightUpdate u{2, 5, "s", 1, 1.2, 40, 31};
  const auto j = ms::to_json(u);
  EXPECT_EQ(j["cycle"], 2);
  EXPECT_EQ(j["example"], 5);
  EXPECT_EQ(j["scene"], "s");
  EXPECT_EQ(j["object"], 1);
  EXPECT_EQ(j["weight"], 1.2);
  EXPECT_EQ(j["energy_before"], 40);
  EXPECT_EQ(j["energy_after"], 31);
}
