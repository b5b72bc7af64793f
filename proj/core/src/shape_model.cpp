#include "multishape/shape_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "multishape/error.hpp"

namespace multishape {

namespace {

constexpr double kRayStep = 0.5;
constexpr double kZeroEigenvalue = 1e-12;
constexpr double kRelativeZeroEigenvalue = 1e-10;

int floor_to_int(double v) { return static_cast<int>(std::floor(v)); }

void require_centroid_inside(const BinaryMask& mask, Point c) {
  if (mask.empty() || mask.count() == 0) {
    throw Error(ErrorCode::kDegenerateMask, "cannot sample a mask without foreground");
  }
  if (!mask.test(floor_to_int(c.x), floor_to_int(c.y))) {
    throw Error(ErrorCode::kCentroidOutsideMask,
                "centroid (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                    ") lies on a background pixel");
  }
}

// Walks one ray and returns the distance of its last foreground step.
double last_foreground_distance(const BinaryMask& mask, Point c, double angle) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  double last = -1.0;
  for (int step = 0;; ++step) {
    const double d = step * kRayStep;
    const int px = floor_to_int(c.x + d * dx);
    const int py = floor_to_int(c.y + d * dy);
    if (!mask.dims().contains(px, py)) break;
    if (mask.at(px, py)) last = d;
  }
  return last;
}

}  // namespace

double ray_angle(int k, int ray_count) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(ray_count);
}

ShapeVector sample_shape_vector(const BinaryMask& mask, Point centroid, int ray_count) {
  if (ray_count < 3) {
    throw Error(ErrorCode::kInvalidArgument, "ray count must be at least 3");
  }
  require_centroid_inside(mask, centroid);
  Eigen::VectorXd radii(ray_count);
  for (int k = 0; k < ray_count; ++k) {
    const double last = last_foreground_distance(mask, centroid, ray_angle(k, ray_count));
    if (last < 0.0) {
      throw Error(ErrorCode::kDegenerateMask,
                  "ray " + std::to_string(k) + " found no foreground");
    }
    radii[k] = last + 0.5 * kRayStep;
  }
  return ShapeVector(std::move(radii));
}

std::vector<std::array<int, 2>> sample_boundary_pixels(const BinaryMask& mask, Point centroid,
                                                       int ray_count) {
  if (ray_count < 3) {
    throw Error(ErrorCode::kInvalidArgument, "ray count must be at least 3");
  }
  require_centroid_inside(mask, centroid);
  std::vector<std::array<int, 2>> pixels;
  pixels.reserve(static_cast<std::size_t>(ray_count));
  for (int k = 0; k < ray_count; ++k) {
    const double angle = ray_angle(k, ray_count);
    const double d = last_foreground_distance(mask, centroid, angle);
    pixels.push_back({floor_to_int(centroid.x + d * std::cos(angle)),
                      floor_to_int(centroid.y + d * std::sin(angle))});
  }
  return pixels;
}

WeightedExampleSet WeightedExampleSet::uniform(std::vector<ShapeExample> examples, double step) {
  WeightedExampleSet set;
  set.weights.assign(examples.size(), 1.0);
  set.examples = std::move(examples);
  set.step = step;
  return set;
}

void WeightedExampleSet::validate() const {
  if (examples.empty()) {
    throw Error(ErrorCode::kEmptyExampleSet, "example set is empty");
  }
  if (weights.size() != examples.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weights length " + std::to_string(weights.size()) +
                    " does not match example count " + std::to_string(examples.size()));
  }
  const int k = examples.front().shape.size();
  for (const auto& e : examples) {
    if (e.shape.size() != k) {
      throw Error(ErrorCode::kDimensionMismatch, "examples disagree on ray count");
    }
  }
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "example weights must be positive");
    }
  }
}

ShapeVector weighted_mean(const WeightedExampleSet& set) {
  set.validate();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(set.examples.front().shape.size());
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    acc += set.weights[i] * set.examples[i].shape.radii;
    total += set.weights[i];
  }
  return ShapeVector(acc / total);
}

Eigen::MatrixXd covariance(const WeightedExampleSet& set, const ShapeVector& mean) {
  set.validate();
  const int k = mean.size();
  if (set.examples.front().shape.size() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "mean and examples disagree on ray count");
  }
  Eigen::MatrixXd dev(k, static_cast<Eigen::Index>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    dev.col(static_cast<Eigen::Index>(i)) = set.examples[i].shape.radii - mean.radii;
  }
  Eigen::MatrixXd cov = dev * dev.transpose() / static_cast<double>(set.size());
  // Exact symmetry regardless of the product kernel's accumulation order.
  return 0.5 * (cov + cov.transpose());
}

int select_component_count(std::span<const double> eigenvalues, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "variance threshold must lie in (0, 1]");
  }
  double total = 0.0;
  for (double v : eigenvalues) total += std::max(v, 0.0);
  if (eigenvalues.empty() || eigenvalues.front() <= kZeroEigenvalue) {
    throw Error(ErrorCode::kRankDeficient, "all eigenvalues are numerically zero");
  }
  const double zero = std::max(kZeroEigenvalue, kRelativeZeroEigenvalue * eigenvalues.front());
  int nonzero = 0;
  while (nonzero < static_cast<int>(eigenvalues.size()) && eigenvalues[nonzero] > zero) {
    ++nonzero;
  }
  double cumulative = 0.0;
  for (int t = 0; t < nonzero; ++t) {
    cumulative += eigenvalues[t];
    if (cumulative / total > threshold) return t + 1;
  }
  return nonzero;
}

namespace {

struct Spectrum {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
  double trace = 0.0;
};

// Full K x K eigendecomposition of the covariance.
Spectrum direct_spectrum(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kRankDeficient, "covariance eigendecomposition failed");
  }
  Spectrum s;
  s.values = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();
  s.trace = cov.trace();
  return s;
}

// With fewer examples than rays, the nonzero spectrum of D D^T / N equals that
// of the small Gram matrix D^T D / N; eigenvectors map back through D.
Spectrum gram_spectrum(const Eigen::MatrixXd& dev) {
  const double n = static_cast<double>(dev.cols());
  Eigen::MatrixXd gram = dev.transpose() * dev / n;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kRankDeficient, "covariance eigendecomposition failed");
  }
  Spectrum s;
  s.values = solver.eigenvalues().reverse();
  const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();
  s.vectors = Eigen::MatrixXd::Zero(dev.rows(), dev.cols());
  for (Eigen::Index j = 0; j < dev.cols(); ++j) {
    if (s.values[j] <= kZeroEigenvalue) continue;
    Eigen::VectorXd v = dev * u.col(j);
    s.vectors.col(j) = v / v.norm();
  }
  s.trace = gram.trace();
  return s;
}

}  // namespace

ShapeModel build_model(const WeightedExampleSet& set, double variance_threshold) {
  set.validate();
  if (set.size() < 2) {
    throw Error(ErrorCode::kEmptyExampleSet, "building a model needs at least two examples");
  }
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "variance threshold must lie in (0, 1]");
  }
  const ShapeVector mean = weighted_mean(set);
  const int k = mean.size();

  Spectrum spectrum;
  if (static_cast<int>(set.size()) < k) {
    Eigen::MatrixXd dev(k, static_cast<Eigen::Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
      dev.col(static_cast<Eigen::Index>(i)) = set.examples[i].shape.radii - mean.radii;
    }
    spectrum = gram_spectrum(dev);
  } else {
    spectrum = direct_spectrum(covariance(set, mean));
  }
  for (Eigen::Index i = 0; i < spectrum.values.size(); ++i) {
    spectrum.values[i] = std::max(spectrum.values[i], 0.0);
  }

  const std::span<const double> values(spectrum.values.data(),
                                       static_cast<std::size_t>(spectrum.values.size()));
  const int t = select_component_count(values, variance_threshold);

  ShapeModel model;
  model.k = k;
  model.t = t;
  model.mean = mean.radii;
  model.eigenvalues = spectrum.values.head(t);
  model.basis = spectrum.vectors.leftCols(t);
  for (int j = 0; j < t; ++j) {
    Eigen::Index arg = 0;
    model.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (model.basis(arg, j) < 0.0) model.basis.col(j) *= -1.0;
  }
  const double total = std::max(spectrum.trace, spectrum.values.sum());
  model.variance_fraction = std::min(1.0, model.eigenvalues.sum() / total);
  model.weights = set.weights;
  return model;
}

Eigen::VectorXd clamp_coefficients(const ShapeModel& model, const Eigen::VectorXd& x,
                                   const SynthesisLimits& limits) {
  if (x.size() != model.t) {
    throw Error(ErrorCode::kDimensionMismatch,
                "coefficient length " + std::to_string(x.size()) + " != t " +
                    std::to_string(model.t));
  }
  const Eigen::VectorXd bound = limits.box_sigmas * model.coefficient_sigmas();
  return x.cwiseMax(-bound).cwiseMin(bound);
}

ShapeVector synthesize(const ShapeModel& model, const Eigen::VectorXd& x,
                       const SynthesisLimits& limits) {
  const Eigen::VectorXd clamped = clamp_coefficients(model, x, limits);
  Eigen::VectorXd s = model.mean + model.basis * clamped;
  return ShapeVector(s.cwiseMax(limits.radius_floor));
}

nlohmann::json to_json(const ShapeModel& model) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json basis = nlohmann::json::array();
  for (int j = 0; j < model.t; ++j) basis.push_back(vec(model.basis.col(j)));
  return nlohmann::json{{"k", model.k},
                        {"t", model.t},
                        {"mean", vec(model.mean)},
                        {"eigenvalues", vec(model.eigenvalues)},
                        {"basis", std::move(basis)},
                        {"variance_fraction", model.variance_fraction},
                        {"weights", model.weights}};
}

ShapeModel model_from_json(const nlohmann::json& doc) {
  try {
    ShapeModel model;
    model.k = doc.at("k").get<int>();
    model.t = doc.at("t").get<int>();
    auto mean = doc.at("mean").get<std::vector<double>>();
    auto eig = doc.at("eigenvalues").get<std::vector<double>>();
    const auto& basis = doc.at("basis");
    if (model.k <= 0 || model.t <= 0 || static_cast<int>(mean.size()) != model.k ||
        static_cast<int>(eig.size()) != model.t || static_cast<int>(basis.size()) != model.t) {
      throw Error(ErrorCode::kDimensionMismatch, "model JSON dimensions are inconsistent");
    }
    model.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), model.k);
    model.eigenvalues = Eigen::Map<Eigen::VectorXd>(eig.data(), model.t);
    model.basis.resize(model.k, model.t);
    for (int j = 0; j < model.t; ++j) {
      auto col = basis[static_cast<std::size_t>(j)].get<std::vector<double>>();
      if (static_cast<int>(col.size()) != model.k) {
        throw Error(ErrorCode::kDimensionMismatch, "model basis column has wrong length");
      }
      model.basis.col(j) = Eigen::Map<Eigen::VectorXd>(col.data(), model.k);
    }
    model.variance_fraction = doc.at("variance_fraction").get<double>();
    model.weights = doc.value("weights", std::vector<double>{});
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model JSON: ") + e.what());
  }
}

std::string serialize_model(const ShapeModel& model) { return to_json(model).dump(1) + "\n"; }

ShapeModel parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model JSON: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace multishape
