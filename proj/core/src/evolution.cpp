#include "multishape/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multishape/error.hpp"
#include "multishape/trust_region.hpp"

namespace multishape {

void ClumpScene::validate() const {
  if (clump.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "scene " + id + " has an empty clump mask");
  }
  if (centroids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "scene " + id + " has no objects");
  }
  if (!truth.empty() && truth.size() != centroids.size()) {
    throw Error(ErrorCode::kManifestMismatch,
                "scene " + id + ": " + std::to_string(centroids.size()) + " centroids but " +
                    std::to_string(truth.size()) + " truth masks");
  }
  for (const auto& t : truth) {
    if (t.dims() != clump.dims()) {
      throw Error(ErrorCode::kDimensionMismatch, "scene " + id + ": truth mask dims differ");
    }
  }
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const auto& c = centroids[i];
    if (!clump.test(static_cast<int>(std::floor(c.x)), static_cast<int>(std::floor(c.y)))) {
      throw Error(ErrorCode::kCentroidOutsideMask,
                  "scene " + id + ": centroid " + std::to_string(i) + " is off the clump");
    }
  }
}

void EvolutionConfig::validate() const {
  const bool ok = energy_threshold_fraction >= 0.0 && max_outer_iterations >= 0 &&
                  fd_step > 0.0 && min_trust_radius > 0.0 &&
                  initial_trust_radius >= min_trust_radius &&
                  max_trust_radius >= initial_trust_radius && shrink_ratio > 0.0 &&
                  grow_ratio > shrink_ratio && shrink_factor > 0.0 && shrink_factor < 1.0 &&
                  grow_factor > 1.0 && alignment_refresh_period >= 1 &&
                  exact_fd_hessian_max_dim >= 0 &&
                  limits.radius_floor > 0.0 && limits.box_sigmas > 0.0;
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument, "invalid evolution configuration");
  }
  grid.validate();
}

std::string_view to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::kEnergyThreshold: return "energy_threshold";
    case HaltReason::kNoDecrease: return "no_decrease";
    case HaltReason::kStationary: return "stationary";
    case HaltReason::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

void require_joint_dims(const ClumpScene& scene, const ShapeModel& model, Eigen::Index x_size,
                        std::size_t alignment_count) {
  const auto n = static_cast<Eigen::Index>(scene.object_count());
  if (x_size != n * model.t || alignment_count != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "joint coefficients/alignments do not match " + std::to_string(n) +
                    " objects with t=" + std::to_string(model.t));
  }
}

// Union of two sorted, disjoint span lists.
std::vector<RowSpan> merge_sorted(const std::vector<RowSpan>& a, const std::vector<RowSpan>& b) {
  std::vector<RowSpan> out;
  out.reserve(a.size() + b.size());
  auto less = [](const RowSpan& l, const RowSpan& r) {
    return l.y != r.y ? l.y < r.y : l.x0 < r.x0;
  };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    const RowSpan& s = (j >= b.size() || (i < a.size() && less(a[i], b[j]))) ? a[i++] : b[j++];
    if (!out.empty() && out.back().y == s.y && s.x0 <= out.back().x1 + 1) {
      out.back().x1 = std::max(out.back().x1, s.x1);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

long energy(const ClumpScene& scene, const ShapeModel& model, const Eigen::VectorXd& x,
            std::span<const Alignment> alignments, const SynthesisLimits& limits) {
  require_joint_dims(scene, model, x.size(), alignments.size());
  BinaryMask unioned(scene.dims());
  for (int i = 0; i < scene.object_count(); ++i) {
    const ShapeVector s = synthesize(model, x.segment(i * model.t, model.t), limits);
    const auto vertices = polygon_vertices(s, scene.centroids[static_cast<std::size_t>(i)],
                                           alignments[static_cast<std::size_t>(i)], scene.dims());
    paint(scan_fill(vertices, scene.dims()), unioned);
  }
  return static_cast<long>(symmetric_difference_count(unioned, scene.clump));
}

EnergyFunction::EnergyFunction(const ClumpScene& scene, const ShapeModel& model,
                               std::vector<Alignment> alignments, SynthesisLimits limits)
    : scene_(&scene),
      model_(&model),
      alignments_(std::move(alignments)),
      limits_(limits),
      index_(scene.clump),
      sigmas_(model.coefficient_sigmas()),
      objects_(scene.object_count()) {
  require_joint_dims(scene, model, static_cast<Eigen::Index>(objects_) * model.t,
                     alignments_.size());
}

std::vector<RowSpan> EnergyFunction::object_spans(const Eigen::VectorXd& block,
                                                  int object) const {
  const ShapeVector s = synthesize(*model_, block.cwiseProduct(sigmas_), limits_);
  const auto vertices = polygon_vertices(s, scene_->centroids[static_cast<std::size_t>(object)],
                                         alignments_[static_cast<std::size_t>(object)],
                                         scene_->dims());
  return scan_fill(vertices, scene_->dims());
}

long EnergyFunction::score(const std::vector<RowSpan>& merged) const {
  long area = 0;
  long inside = 0;
  for (const auto& s : merged) {
    area += s.length();
    inside += index_.covered(s);
  }
  return static_cast<long>(index_.foreground()) + area - 2 * inside;
}

long EnergyFunction::operator()(const Eigen::VectorXd& z) const {
  if (z.size() != dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "standardized coefficient length mismatch");
  }
  const int t = model_->t;
  std::vector<RowSpan> merged;
  for (int i = 0; i < objects_; ++i) {
    merged = merge_sorted(merged, object_spans(z.segment(i * t, t), i));
  }
  return score(merged);
}

void EnergyFunction::set_base(const Eigen::VectorXd& z) {
  if (z.size() != dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "standardized coefficient length mismatch");
  }
  const int t = model_->t;
  std::vector<std::vector<RowSpan>> fills;
  fills.reserve(static_cast<std::size_t>(objects_));
  for (int i = 0; i < objects_; ++i) fills.push_back(object_spans(z.segment(i * t, t), i));
  // others_[i] = union of fills except i, via prefix and suffix unions.
  std::vector<std::vector<RowSpan>> prefix(static_cast<std::size_t>(objects_) + 1);
  for (int i = 0; i < objects_; ++i) {
    prefix[static_cast<std::size_t>(i) + 1] =
        merge_sorted(prefix[static_cast<std::size_t>(i)], fills[static_cast<std::size_t>(i)]);
  }
  others_.assign(static_cast<std::size_t>(objects_), {});
  std::vector<RowSpan> suffix;
  for (int i = objects_ - 1; i >= 0; --i) {
    others_[static_cast<std::size_t>(i)] = merge_sorted(prefix[static_cast<std::size_t>(i)], suffix);
    suffix = merge_sorted(suffix, fills[static_cast<std::size_t>(i)]);
  }
}

long EnergyFunction::probe(int object, const Eigen::VectorXd& block) const {
  if (others_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "probe() before set_base()");
  }
  return score(merge_sorted(others_[static_cast<std::size_t>(object)], object_spans(block, object)));
}

Eigen::VectorXd gradient_fd(const ClumpScene& scene, const ShapeModel& model,
                            const Eigen::VectorXd& z, std::span<const Alignment> alignments,
                            double h, const SynthesisLimits& limits) {
  EnergyFunction f(scene, model, {alignments.begin(), alignments.end()}, limits);
  f.set_base(z);
  const int t = model.t;
  Eigen::VectorXd g(z.size());
  for (int i = 0; i < scene.object_count(); ++i) {
    Eigen::VectorXd block = z.segment(i * t, t);
    for (int j = 0; j < t; ++j) {
      const double base = block[j];
      block[j] = base + h;
      const double up = static_cast<double>(f.probe(i, block));
      block[j] = base - h;
      const double down = static_cast<double>(f.probe(i, block));
      block[j] = base;
      g[i * t + j] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

namespace {

std::vector<Alignment> align_all(const Aligner& aligner, const ClumpScene& scene,
                                 const ShapeModel& model, const Eigen::VectorXd& z,
                                 const SynthesisLimits& limits) {
  const Eigen::VectorXd sigmas = model.coefficient_sigmas();
  const int t = model.t;
  std::vector<Alignment> out;
  out.reserve(static_cast<std::size_t>(scene.object_count()));
  for (int i = 0; i < scene.object_count(); ++i) {
    const ShapeVector s = synthesize(model, z.segment(i * t, t).cwiseProduct(sigmas), limits);
    out.push_back(aligner(s, scene.centroids[static_cast<std::size_t>(i)]));
  }
  return out;
}

Eigen::VectorXd to_raw(const ShapeModel& model, const Eigen::VectorXd& z, int objects) {
  const Eigen::VectorXd sigmas = model.coefficient_sigmas();
  Eigen::VectorXd x(z.size());
  for (int i = 0; i < objects; ++i) {
    x.segment(i * model.t, model.t) = z.segment(i * model.t, model.t).cwiseProduct(sigmas);
  }
  return x;
}

std::vector<BinaryMask> final_masks(const ClumpScene& scene, const ShapeModel& model,
                                    const Eigen::VectorXd& x,
                                    const std::vector<Alignment>& alignments,
                                    const SynthesisLimits& limits) {
  std::vector<BinaryMask> masks;
  for (int i = 0; i < scene.object_count(); ++i) {
    const ShapeVector s = synthesize(model, x.segment(i * model.t, model.t), limits);
    masks.push_back(rasterize(s, scene.centroids[static_cast<std::size_t>(i)],
                              alignments[static_cast<std::size_t>(i)], scene.dims()));
  }
  return masks;
}

}  // namespace

EvolutionResult evolve(const ClumpScene& scene, const ShapeModel& model,
                       const EvolutionConfig& config) {
  scene.validate();
  config.validate();
  if (model.t <= 0 || model.mean.size() != model.k) {
    throw Error(ErrorCode::kDimensionMismatch, "shape model is malformed");
  }
  const int objects = scene.object_count();
  const int dim = objects * model.t;
  const double box = config.limits.box_sigmas;
  const Aligner aligner(scene.clump, config.grid, model.k);

  EvolutionState state;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
  state.alignments = align_all(aligner, scene, model, z, config.limits);
  EnergyFunction f(scene, model, state.alignments, config.limits);
  state.energy = f(z);
  state.initial_energy = state.energy;
  state.energy_threshold =
      config.energy_threshold_fraction * static_cast<double>(aligner.clump_index().foreground());
  state.trust_radius = config.initial_trust_radius;

  auto finish = [&](HaltReason reason) {
    state.halted = reason;
    state.x = to_raw(model, z, objects);
    EvolutionResult result;
    result.masks = final_masks(scene, model, state.x, state.alignments, config.limits);
    result.state = std::move(state);
    return result;
  };

  if (static_cast<double>(state.energy) <= state.energy_threshold) {
    return finish(HaltReason::kEnergyThreshold);
  }

  const bool use_exact = config.exact_fd_hessian || dim <= config.exact_fd_hessian_max_dim;
  Sr1Hessian sr1(dim);
  Eigen::VectorXd gradient;
  bool gradient_valid = false;
  bool aligned_at_z = true;
  Eigen::VectorXd last_step;
  Eigen::VectorXd last_gradient;
  bool pending_secant = false;

  for (int k = 1; k <= config.max_outer_iterations; ++k) {
    state.iteration = k;
    if (!aligned_at_z && (k - 1) % config.alignment_refresh_period == 0) {
      // A refresh that would raise E is discarded so accepted energies stay
      // strictly decreasing.
      auto refreshed = align_all(aligner, scene, model, z, config.limits);
      aligned_at_z = true;
      if (refreshed != state.alignments) {
        EnergyFunction candidate(scene, model, refreshed, config.limits);
        const long e = candidate(z);
        if (e <= state.energy) {
          state.alignments = std::move(refreshed);
          f = std::move(candidate);
          state.energy = e;
          gradient_valid = false;
          if (static_cast<double>(e) <= state.energy_threshold) {
            return finish(HaltReason::kEnergyThreshold);
          }
        }
      }
    }

    if (!gradient_valid) {
      gradient = gradient_fd(scene, model, z, state.alignments, config.fd_step, config.limits);
      gradient_valid = true;
      if (pending_secant) {
        sr1.update(last_step, gradient - last_gradient);
        pending_secant = false;
      }
    }
    if (gradient.isZero(0.0)) return finish(HaltReason::kStationary);

    const Eigen::MatrixXd hessian =
        use_exact ? hessian_fd(f, z, config.fd_step) : sr1.matrix();
    const double radius = state.trust_radius;
    const Eigen::VectorXd p = trust_region_step(gradient, hessian, radius);
    const Eigen::VectorXd trial = (z + p).cwiseMax(-box).cwiseMin(box);
    const Eigen::VectorXd step = trial - z;
    const long trial_energy = f(trial);
    const double predicted = -model_decrease(gradient, hessian, step);
    const double actual = static_cast<double>(state.energy - trial_energy);
    double rho;
    if (predicted > 0.0) {
      rho = actual / predicted;
    } else {
      rho = actual > 0.0 ? 1.0 : -1.0;
    }
    const bool accepted = rho > 0.0 && trial_energy < state.energy;

    if (accepted) {
      last_step = step;
      last_gradient = gradient;
      pending_secant = true;
      z = trial;
      state.energy = trial_energy;
      gradient_valid = false;
      aligned_at_z = false;
    }
    state.trace.push_back({k, state.energy, radius, p.norm(), accepted});

    if (!accepted || rho < config.shrink_ratio) {
      state.trust_radius = std::max(radius * config.shrink_factor, config.min_trust_radius);
    } else if (rho > config.grow_ratio && p.norm() >= 0.999 * radius) {
      state.trust_radius = std::min(radius * config.grow_factor, config.max_trust_radius);
    }

    if (static_cast<double>(state.energy) <= state.energy_threshold) {
      return finish(HaltReason::kEnergyThreshold);
    }
    if (!accepted && radius <= config.min_trust_radius) {
      return finish(HaltReason::kNoDecrease);
    }
  }
  return finish(HaltReason::kMaxIterations);
}

nlohmann::json trace_to_json(const EvolutionState& state) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& e : state.trace) {
    iterations.push_back({{"k", e.iteration},
                          {"energy", e.energy},
                          {"delta", e.trust_radius},
                          {"step_norm", e.step_norm},
                          {"accepted", e.accepted}});
  }
  return {{"iterations", std::move(iterations)},
          {"initial_energy", state.initial_energy},
          {"energy_threshold", state.energy_threshold},
          {"final_energy", state.energy},
          {"halted_reason", std::string(to_string(state.halted))}};
}

}  // namespace multishape
