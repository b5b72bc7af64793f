#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "multishape/evolution.hpp"
#include "multishape/shape_model.hpp"

namespace multishape {

/// A clump with the ground-truth shape vector of each of its objects.
struct TrainingPair {
  ClumpScene scene;
  std::vector<ShapeVector> shapes;

  void validate() const;
};

struct LearningConfig {
  double step = 0.1;
  int max_tries_per_example = 20;
  int max_cycles = 50;
  double variance_threshold = kDefaultVarianceThreshold;
  EvolutionConfig evolution = [] {
    EvolutionConfig c;
    c.max_outer_iterations = 50;
    return c;
  }();
  /// Visit pairs in a seeded random order each cycle instead of dataset order.
  bool shuffle = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One committed weight increase.
struct WeightUpdate {
  int cycle = 0;
  std::size_t example = 0;  // index into the flattened example list
  std::string scene_id;
  int object_id = 0;
  double weight = 1.0;
  long energy_before = 0;
  long energy_after = 0;
};

struct LearningResult {
  std::vector<double> weights;
  ShapeModel model;
  std::vector<WeightUpdate> history;
  int cycles = 0;
  long tentative_evaluations = 0;
  bool converged = false;  // a full cycle committed nothing
};

/// Final clump energy of evolve() on the pair's scene under `model`.
long terminated_energy(const TrainingPair& pair, const ShapeModel& model,
                       const EvolutionConfig& evolution);

/// Flattens every pair's shapes into one example list, in dataset order.
std::vector<ShapeExample> collect_examples(std::span<const TrainingPair> dataset);

/// Learns per-example importance weights: each example's weight is raised by
/// `step` while doing so strictly lowers the terminated energy of the pair
/// being processed; cycles over all pairs until a cycle commits nothing.
LearningResult learn(std::span<const TrainingPair> dataset, const LearningConfig& config);

nlohmann::json to_json(const WeightUpdate& update);

}  // namespace multishape
