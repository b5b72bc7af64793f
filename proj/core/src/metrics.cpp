#include "multishape/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "multishape/error.hpp"

namespace multishape {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

PixelMetrics pixel_metrics(std::span<const BinaryMask> predicted,
                           std::span<const BinaryMask> truth) {
  if (truth.empty()) {
    throw Error(ErrorCode::kEmptyTruth, "no truth masks to evaluate against");
  }
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(truth.size()) + " truths");
  }
  const BinaryMask truth_union = union_masks(truth);
  const BinaryMask pred_union = union_masks(predicted);
  if (truth_union.dims() != pred_union.dims()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and truth dims differ");
  }

  std::size_t truth_fg = 0;
  std::size_t hit = 0;
  std::size_t truth_bg = 0;
  std::size_t rejected = 0;
  const auto t = truth_union.bits();
  const auto p = pred_union.bits();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i]) {
      ++truth_fg;
      hit += p[i];
    } else {
      ++truth_bg;
      rejected += 1 - p[i];
    }
  }

  std::size_t missed = 0;
  std::size_t truth_total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t n = truth[i].count();
    truth_total += n;
    missed += n - intersection_count(truth[i], predicted[i]);
  }

  PixelMetrics m;
  m.tpr = ratio(hit, truth_fg);
  m.tnr = ratio(rejected, truth_bg);
  m.fpr = 1.0 - m.tnr;
  m.fnr = ratio(missed, truth_total);
  return m;
}

double dsc(const BinaryMask& predicted, const BinaryMask& truth) {
  const std::size_t inter = intersection_count(predicted, truth);
  const std::size_t total = predicted.count() + truth.count();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

double overlapping_degree(const BinaryMask& object_truth, std::span<const BinaryMask> other_truths,
                          Point centroid, int ray_count) {
  const auto samples = sample_boundary_pixels(object_truth, centroid, ray_count);
  if (other_truths.empty()) return 0.0;
  const BinaryMask others = union_masks(other_truths);
  if (others.dims() != object_truth.dims()) {
    throw Error(ErrorCode::kDimensionMismatch, "truth masks disagree on dims");
  }
  int occluded = 0;
  for (const auto& [x, y] : samples) occluded += others.test(x, y) ? 1 : 0;
  return static_cast<double>(occluded) / static_cast<double>(ray_count);
}

int degree_bin(double degree) {
  if (degree < 0.25) return 0;
  if (degree < 0.5) return 1;
  if (degree < 0.75) return 2;
  return 3;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::array<BinSummary, kDegreeBins> bin_by_degree(std::span<const ObjectScore> objects) {
  std::array<std::vector<double>, kDegreeBins> values;
  std::array<BinSummary, kDegreeBins> bins{};
  for (const auto& o : objects) {
    const int b = degree_bin(o.degree);
    values[static_cast<std::size_t>(b)].push_back(o.dsc);
    if (o.degree == 0.0) ++bins[static_cast<std::size_t>(b)].isolated;
  }
  for (std::size_t b = 0; b < bins.size(); ++b) bins[b].dsc = summarize(values[b]);
  return bins;
}

SceneReport evaluate_scene(const std::string& scene_id, std::span<const BinaryMask> predicted,
                           std::span<const BinaryMask> truth, std::span<const Point> centroids,
                           int ray_count) {
  if (centroids.size() != truth.size()) {
    throw Error(ErrorCode::kManifestMismatch,
                "scene " + scene_id + ": centroid and truth counts differ");
  }
  SceneReport report;
  report.scene = scene_id;
  report.pixels = pixel_metrics(predicted, truth);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<BinaryMask> others;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (j != i) others.push_back(truth[j]);
    }
    ObjectScore o;
    o.object = static_cast<int>(i);
    o.dsc = dsc(predicted[i], truth[i]);
    o.degree = overlapping_degree(truth[i], others, centroids[i], ray_count);
    o.bin = degree_bin(o.degree);
    o.isolated = o.degree == 0.0;
    report.objects.push_back(o);
  }
  return report;
}

namespace {

const std::array<const char*, kDegreeBins> kBinLabels = {"(0,1/4)", "[1/4,2/4)", "[2/4,3/4)",
                                                         "[3/4,1)"};

nlohmann::json summary_json(const Summary& s) {
  nlohmann::json j{{"count", s.count}};
  if (s.count > 0) {
    j["mean"] = s.mean;
    j["std"] = s.std;
  }
  return j;
}

}  // namespace

nlohmann::json report_to_json(std::span<const SceneReport> scenes) {
  std::vector<double> tpr, tnr, fpr, fnr, dscs;
  std::vector<ObjectScore> objects;
  nlohmann::json per_scene = nlohmann::json::array();
  for (const auto& s : scenes) {
    tpr.push_back(s.pixels.tpr);
    tnr.push_back(s.pixels.tnr);
    fpr.push_back(s.pixels.fpr);
    fnr.push_back(s.pixels.fnr);
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : s.objects) {
      dscs.push_back(o.dsc);
      objects.push_back(o);
      objs.push_back({{"object", o.object},
                      {"dsc", o.dsc},
                      {"overlapping_degree", o.degree},
                      {"bin", o.bin},
                      {"isolated", o.isolated}});
    }
    per_scene.push_back({{"scene", s.scene},
                         {"tpr", s.pixels.tpr},
                         {"tnr", s.pixels.tnr},
                         {"fpr", s.pixels.fpr},
                         {"fnr", s.pixels.fnr},
                         {"objects", std::move(objs)}});
  }
  nlohmann::json bins = nlohmann::json::array();
  const auto binned = bin_by_degree(objects);
  for (std::size_t b = 0; b < binned.size(); ++b) {
    nlohmann::json j = summary_json(binned[b].dsc);
    j["range"] = kBinLabels[b];
    j["isolated_in_bin"] = binned[b].isolated;
    bins.push_back(std::move(j));
  }
  return {{"pixel",
           {{"tpr", summary_json(summarize(tpr))},
            {"tnr", summary_json(summarize(tnr))},
            {"fpr", summary_json(summarize(fpr))},
            {"fnr", summary_json(summarize(fnr))}}},
          {"dsc", {{"overall", summary_json(summarize(dscs))}, {"bins", std::move(bins)}}},
          {"conventions",
           {{"tpr", "union of objects"},
            {"fnr", "per-object sum; overlap pixels counted once per object"},
            {"bin0", "isolated objects (degree 0) are placed in bin 0"}}},
          {"scenes", std::move(per_scene)}};
}

std::string report_to_csv(std::span<const SceneReport> scenes) {
  // Long format: one value per line, the same numbers as report_to_json.
  std::string out = "record,key,metric,value\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto row = [&](const std::string& record, const std::string& key, const std::string& metric,
                 const std::string& value) {
    out += record + "," + key + "," + metric + "," + value + "\n";
  };
  auto summary_rows = [&](const std::string& key, const std::string& metric, const Summary& s) {
    row("aggregate", key, metric + "_count", std::to_string(s.count));
    if (s.count == 0) return;
    row("aggregate", key, metric + "_mean", num(s.mean));
    row("aggregate", key, metric + "_std", num(s.std));
  };

  std::vector<double> tpr, tnr, fpr, fnr, dscs;
  std::vector<ObjectScore> objects;
  for (const auto& s : scenes) {
    row("scene", s.scene, "tpr", num(s.pixels.tpr));
    row("scene", s.scene, "tnr", num(s.pixels.tnr));
    row("scene", s.scene, "fpr", num(s.pixels.fpr));
    row("scene", s.scene, "fnr", num(s.pixels.fnr));
    tpr.push_back(s.pixels.tpr);
    tnr.push_back(s.pixels.tnr);
    fpr.push_back(s.pixels.fpr);
    fnr.push_back(s.pixels.fnr);
    for (const auto& o : s.objects) {
      const std::string key = s.scene + "/" + std::to_string(o.object);
      row("object", key, "dsc", num(o.dsc));
      row("object", key, "overlapping_degree", num(o.degree));
      row("object", key, "bin", std::to_string(o.bin));
      dscs.push_back(o.dsc);
      objects.push_back(o);
    }
  }
  summary_rows("pixel", "tpr", summarize(tpr));
  summary_rows("pixel", "tnr", summarize(tnr));
  summary_rows("pixel", "fpr", summarize(fpr));
  summary_rows("pixel", "fnr", summarize(fnr));
  summary_rows("dsc", "overall", summarize(dscs));
  const auto binned = bin_by_degree(objects);
  for (std::size_t b = 0; b < binned.size(); ++b) {
    summary_rows("dsc", std::string("bin") + std::to_string(b), binned[b].dsc);
  }
  return out;
}

}  // namespace multishape
