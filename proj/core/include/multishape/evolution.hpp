#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multishape/mask.hpp"
#include "multishape/raster.hpp"
#include "multishape/shape_model.hpp"

namespace multishape {

/// A clump to segment: foreground = cytoplasm and nuclei pixels, one centroid
/// per object. `truth` is optional and, when present, has one mask per object.
struct ClumpScene {
  std::string id;
  BinaryMask clump;
  std::vector<Point> centroids;
  std::vector<BinaryMask> truth;

  Dims dims() const { return clump.dims(); }
  int object_count() const { return static_cast<int>(centroids.size()); }
  /// Throws kInvalidArgument / kCentroidOutsideMask / kDimensionMismatch.
  void validate() const;
};

struct EvolutionConfig {
  double energy_threshold_fraction = 0.05;
  int max_outer_iterations = 200;
  // Trust-region quantities are in standardized coefficient units, i.e.
  // multiples of sqrt(lambda_j).
  double fd_step = 0.3;
  double initial_trust_radius = 1.0;
  double min_trust_radius = 1e-3;
  double max_trust_radius = 10.0;
  double shrink_ratio = 0.25;
  double grow_ratio = 0.75;
  double shrink_factor = 0.5;
  double grow_factor = 2.0;
  int alignment_refresh_period = 1;
  bool exact_fd_hessian = false;
  // The exact finite-difference Hessian is also used whenever N * t is at
  // most this value; above it the SR1 approximation is used.
  int exact_fd_hessian_max_dim = 30;
  AlignmentGrid grid;
  SynthesisLimits limits;

  void validate() const;
};

enum class HaltReason { kEnergyThreshold, kNoDecrease, kStationary, kMaxIterations };

std::string_view to_string(HaltReason reason);

struct TraceEntry {
  int iteration = 0;
  long energy = 0;
  double trust_radius = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
};

struct EvolutionState {
  Eigen::VectorXd x;  // raw coefficients, object-major (N * t)
  std::vector<Alignment> alignments;
  double trust_radius = 0.0;
  long energy = 0;
  long initial_energy = 0;
  double energy_threshold = 0.0;
  int iteration = 0;
  HaltReason halted = HaltReason::kMaxIterations;
  std::vector<TraceEntry> trace;
};

struct EvolutionResult {
  std::vector<BinaryMask> masks;
  EvolutionState state;
};

/// |B_u xor B_c| for raw joint coefficients `x` (N * t entries).
long energy(const ClumpScene& scene, const ShapeModel& model, const Eigen::VectorXd& x,
            std::span<const Alignment> alignments, const SynthesisLimits& limits = {});

/// Clump discrepancy as a function of standardized joint coefficients
/// z = x / sqrt(lambda), with alignments frozen.
class EnergyFunction {
 public:
  EnergyFunction(const ClumpScene& scene, const ShapeModel& model,
                 std::vector<Alignment> alignments, SynthesisLimits limits = {});

  int dimension() const { return objects_ * model_->t; }
  long operator()(const Eigen::VectorXd& z) const;

  /// Caches per-object fills at `z` so that probe() only refills one object.
  void set_base(const Eigen::VectorXd& z);
  /// Energy at the base point with object `object`'s block replaced by `block`.
  long probe(int object, const Eigen::VectorXd& block) const;

  std::vector<RowSpan> object_spans(const Eigen::VectorXd& block, int object) const;
  const std::vector<Alignment>& alignments() const { return alignments_; }

 private:
  long score(const std::vector<RowSpan>& merged) const;

  const ClumpScene* scene_;
  const ShapeModel* model_;
  std::vector<Alignment> alignments_;
  SynthesisLimits limits_;
  MaskIndex index_;
  Eigen::VectorXd sigmas_;
  int objects_;
  std::vector<std::vector<RowSpan>> others_;  // union of all objects but i
};

/// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h.
template <class F>
Eigen::VectorXd gradient_fd(F&& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = static_cast<double>(f(probe));
    probe[j] = x[j] - h;
    const double down = static_cast<double>(f(probe));
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian: (f(x+h e_j) - 2 f(x) + f(x-h e_j)) / h^2 on the
/// diagonal and the four-point stencil / 4h^2 off it.
template <class F>
Eigen::MatrixXd hessian_fd(F&& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  const double center = static_cast<double>(f(x));
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = x[i] + h;
    const double up = static_cast<double>(f(p));
    p[i] = x[i] - h;
    const double down = static_cast<double>(f(p));
    p[i] = x[i];
    hess(i, i) = (up - 2.0 * center + down) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto at = [&](double si, double sj) {
        p[i] = x[i] + si * h;
        p[j] = x[j] + sj * h;
        const double v = static_cast<double>(f(p));
        p[i] = x[i];
        p[j] = x[j];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

/// FD gradient of the clump energy in standardized coefficients; only the
/// probed object is refilled per evaluation.
Eigen::VectorXd gradient_fd(const ClumpScene& scene, const ShapeModel& model,
                            const Eigen::VectorXd& z, std::span<const Alignment> alignments,
                            double h, const SynthesisLimits& limits = {});

/// Jointly evolves every object's coefficients from zero by trust-region steps
/// on the clump energy, refreshing alignments between iterations.
EvolutionResult evolve(const ClumpScene& scene, const ShapeModel& model,
                       const EvolutionConfig& config = {});

nlohmann::json trace_to_json(const EvolutionState& state);

}  // namespace multishape
