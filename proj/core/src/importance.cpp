#include "multishape/importance.hpp"

#include <numeric>
#include <random>

#include "multishape/error.hpp"

namespace multishape {

void TrainingPair::validate() const {
  scene.validate();
  if (shapes.size() != scene.centroids.size()) {
    throw Error(ErrorCode::kManifestMismatch,
                "training pair " + scene.id + " has " + std::to_string(shapes.size()) +
                    " shapes for " + std::to_string(scene.centroids.size()) + " centroids");
  }
}

void LearningConfig::validate() const {
  if (!(step > 0.0) || max_tries_per_example < 1 || max_cycles < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "learning step, tries and cycles must all be positive");
  }
  evolution.validate();
}

long terminated_energy(const TrainingPair& pair, const ShapeModel& model,
                       const EvolutionConfig& evolution) {
  for (const auto& s : pair.shapes) {
    if (s.size() != model.k) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "pair " + pair.scene.id + " has K=" + std::to_string(s.size()) +
                      " but the model has K=" + std::to_string(model.k));
    }
  }
  return evolve(pair.scene, model, evolution).state.energy;
}

std::vector<ShapeExample> collect_examples(std::span<const TrainingPair> dataset) {
  std::vector<ShapeExample> out;
  for (const auto& pair : dataset) {
    for (std::size_t i = 0; i < pair.shapes.size(); ++i) {
      out.push_back({pair.scene.id, static_cast<int>(i), pair.shapes[i]});
    }
  }
  return out;
}

LearningResult learn(std::span<const TrainingPair> dataset, const LearningConfig& config) {
  if (dataset.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "importance learning needs at least one pair");
  }
  config.validate();
  for (const auto& pair : dataset) pair.validate();

  WeightedExampleSet set = WeightedExampleSet::uniform(collect_examples(dataset), config.step);
  std::vector<std::size_t> first_example(dataset.size());
  for (std::size_t j = 0, offset = 0; j < dataset.size(); ++j) {
    first_example[j] = offset;
    offset += dataset[j].shapes.size();
  }

  LearningResult result;
  result.model = build_model(set, config.variance_threshold);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);

  for (int cycle = 0; cycle < config.max_cycles; ++cycle) {
    result.cycles = cycle + 1;
    if (config.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
      }
    }
    int committed = 0;
    for (std::size_t j : order) {
      const TrainingPair& pair = dataset[j];
      long current = terminated_energy(pair, result.model, config.evolution);
      for (std::size_t i = 0; i < pair.shapes.size(); ++i) {
        const std::size_t e = first_example[j] + i;
        for (int attempt = 0; attempt < config.max_tries_per_example; ++attempt) {
          const double previous = set.weights[e];
          set.weights[e] = previous + config.step;
          ShapeModel candidate = build_model(set, config.variance_threshold);
          const long energy = terminated_energy(pair, candidate, config.evolution);
          ++result.tentative_evaluations;
          if (energy >= current) {
            set.weights[e] = previous;
            break;
          }
          result.history.push_back({cycle, e, pair.scene.id, static_cast<int>(i),
                                    set.weights[e], current, energy});
          result.model = std::move(candidate);
          current = energy;
          ++committed;
        }
      }
    }
    if (committed == 0) {
      result.converged = true;
      break;
    }
  }
  result.weights = set.weights;
  result.model.weights = set.weights;
  return result;
}

nlohmann::json to_json(const WeightUpdate& update) {
  return {{"cycle", update.cycle},
          {"example", update.example},
          {"scene", update.scene_id},
          {"object", update.object_id},
          {"weight", update.weight},
          {"energy_before", update.energy_before},
          {"energy_after", update.energy_after}};
}

}  // namespace multishape
