#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "multishape/error.hpp"
#include "multishape/evolution.hpp"
#include "multishape/importance.hpp"
#include "multishape/metrics.hpp"
#include "multishape/netpbm.hpp"
#include "multishape/shape_model.hpp"
#include "multishape/synthgen.hpp"

namespace multishape::cli {
namespace fs = std::filesystem;

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. If any call throws,
/// the exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string object_file(const std::string& scene, std::size_t i) {
  return scene + "_obj" + std::to_string(i) + ".pgm";
}

RgbImage overlay(const ClumpScene& scene, const std::vector<BinaryMask>& masks) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{{230, 25, 75},
                                                                           {60, 180, 75},
                                                                           {0, 130, 200},
                                                                           {255, 225, 25},
                                                                           {245, 130, 48},
                                                                           {145, 30, 180},
                                                                           {70, 240, 240},
                                                                           {240, 50, 230}}};
  const Dims d = scene.dims();
  RgbImage img(d);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      if (scene.clump.test(x, y)) img.at(x, y) = {128, 128, 128};
    }
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto& m = masks[i];
    for (int y = 0; y < d.height; ++y) {
      for (int x = 0; x < d.width; ++x) {
        if (!m.test(x, y)) continue;
        const bool edge = x == 0 || y == 0 || x + 1 == d.width || y + 1 == d.height ||
                          !m.test(x - 1, y) || !m.test(x + 1, y) || !m.test(x, y - 1) ||
                          !m.test(x, y + 1);
        if (edge) img.at(x, y) = kPalette[i % kPalette.size()];
      }
    }
  }
  return img;
}

std::vector<ClumpScene> load_dataset(const fs::path& dir) {
  auto scenes = import_dataset(dir);
  if (scenes.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no scenes found in " + dir.string());
  }
  return scenes;
}

std::vector<ShapeVector> sample_truth_shapes(const ClumpScene& scene, int ray_count) {
  if (scene.truth.size() != scene.centroids.size()) {
    throw Error(ErrorCode::kManifestMismatch,
                "scene " + scene.id + ": truth masks do not match the centroid count");
  }
  std::vector<ShapeVector> shapes;
  for (std::size_t i = 0; i < scene.truth.size(); ++i) {
    try {
      shapes.push_back(sample_shape_vector(scene.truth[i], scene.centroids[i], ray_count));
    } catch (const Error& e) {
      throw Error(e.code(), "scene " + scene.id + " object " + std::to_string(i) + ": " +
                                e.what());
    }
  }
  return shapes;
}

std::string single_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

fs::path manifest_path(const fs::path& model_path) {
  return fs::path(model_path).replace_extension(".manifest.json");
}

fs::path importance_history_path(const fs::path& model_path) {
  return fs::path(model_path).replace_extension(".importance.jsonl");
}

fs::path csv_report_path(const fs::path& report_path) {
  return fs::path(report_path).replace_extension(".csv");
}

std::vector<std::size_t> training_indices(std::size_t scene_count, const RunConfig& config) {
  std::vector<std::size_t> out;
  const auto folds = static_cast<std::size_t>(config.folds);
  const auto fold = static_cast<std::size_t>(config.fold);
  for (std::size_t i = 0; i < scene_count; ++i) {
    if (folds <= 1) {
      out.push_back(i);
      continue;
    }
    const bool in_fold = i >= fold * scene_count / folds && i < (fold + 1) * scene_count / folds;
    if (in_fold == config.invert) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> testing_indices(std::size_t scene_count, const RunConfig& config) {
  if (config.folds <= 1) return training_indices(scene_count, config);
  const auto train = training_indices(scene_count, config);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene_count; ++i) {
    if (!std::binary_search(train.begin(), train.end(), i)) out.push_back(i);
  }
  return out;
}

void cmd_generate(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  const auto count = static_cast<std::size_t>(config.count);
  const nlohmann::json provenance = config.generator.to_json();
  parallel_for(count, config.jobs, [&](std::size_t i) {
    const auto generated = generate_scene(config.generator, i);
    write_scene(generated.scene, out_dir / generated.scene.id, provenance);
  });
  log << "generated " << count << " scenes in " << out_dir.string() << "\n";
}

void cmd_train(const RunConfig& config, const fs::path& dataset_dir, const fs::path& model_path,
               std::ostream& log) {
  const auto scenes = load_dataset(dataset_dir);
  const auto selected = training_indices(scenes.size(), config);
  if (selected.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "the selected fold leaves no training scenes");
  }

  std::vector<TrainingPair> pairs;
  for (std::size_t i : selected) {
    pairs.push_back({scenes[i], sample_truth_shapes(scenes[i], config.ray_count)});
  }
  auto examples = collect_examples(pairs);
  log << "training on " << selected.size() << " of " << scenes.size() << " scenes ("
      << examples.size() << " examples)\n";

  ShapeModel model;
  if (config.learn_importance) {
    const LearningResult learned = learn(pairs, config.learning);
    std::string lines;
    for (const auto& update : learned.history) lines += to_json(update).dump() + "\n";
    write_file_atomic(importance_history_path(model_path), lines);
    log << "importance learning: " << learned.history.size() << " updates over "
        << learned.cycles << " cycles" << (learned.converged ? "" : " (cap reached)") << "\n";
    model = learned.model;
  } else {
    model = build_model(WeightedExampleSet::uniform(examples, config.learning.step),
                        config.variance_threshold);
  }

  nlohmann::json manifest = {{"model", model_path.filename().string()},
                             {"scene_count", selected.size()},
                             {"scenes", nlohmann::json::array()},
                             {"examples", nlohmann::json::array()},
                             {"config", config.to_json()}};
  for (std::size_t i : selected) manifest["scenes"].push_back(scenes[i].id);
  for (const auto& e : examples) {
    manifest["examples"].push_back({{"scene", e.scene_id}, {"object", e.object_id}});
  }
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  write_file_atomic(model_path, serialize_model(model));
  write_file_atomic(manifest_path(model_path), manifest.dump(1) + "\n");
  log << "model: K=" << model.k << " t=" << model.t
      << " variance=" << format_real(model.variance_fraction) << "\n";
}

void cmd_segment(const RunConfig& config, const fs::path& model_path, const fs::path& dataset_dir,
                 const fs::path& out_dir, std::ostream& log) {
  const ShapeModel model = parse_model(read_file(model_path));
  if (model.k != config.ray_count) {
    throw Error(ErrorCode::kDimensionMismatch, "model has K=" + std::to_string(model.k) +
                                                   " but ray_count is " +
                                                   std::to_string(config.ray_count));
  }
  const auto scenes = load_dataset(dataset_dir);
  const auto selected = testing_indices(scenes.size(), config);
  fs::create_directories(out_dir);

  std::vector<std::string> lines(selected.size());
  std::vector<std::vector<double>> scores(selected.size());
  parallel_for(selected.size(), config.jobs, [&](std::size_t j) {
    const ClumpScene& scene = scenes[selected[j]];
    const EvolutionResult result = evolve(scene, model, config.evolution);
    for (std::size_t i = 0; i < result.masks.size(); ++i) {
      write_pgm(out_dir / object_file(scene.id, i), result.masks[i]);
    }
    write_file_atomic(out_dir / (scene.id + "_trace.json"),
                      trace_to_json(result.state).dump(1) + "\n");
    write_ppm(out_dir / (scene.id + "_overlay.ppm"), overlay(scene, result.masks));

    std::ostringstream line;
    line << scene.id << ": " << to_string(result.state.halted) << " E=" << result.state.energy
         << "/" << result.state.initial_energy << " iterations=" << result.state.iteration;
    if (scene.truth.size() == result.masks.size()) {
      for (std::size_t i = 0; i < result.masks.size(); ++i) {
        scores[j].push_back(dsc(result.masks[i], scene.truth[i]));
      }
      line << " mean_dsc=" << format_real(summarize(scores[j]).mean);
    }
    lines[j] = line.str();
  });

  std::vector<double> all;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    log << lines[j] << "\n";
    all.insert(all.end(), scores[j].begin(), scores[j].end());
  }
  log << "segmented " << selected.size() << " scenes";
  if (!all.empty()) log << "; mean DSC " << format_real(summarize(all).mean);
  log << "\n";
}

void cmd_evaluate(const RunConfig& config, const fs::path& pred_dir, const fs::path& dataset_dir,
                  const fs::path& report_path, std::ostream& log) {
  const auto scenes = load_dataset(dataset_dir);

  std::map<std::string, std::size_t> predicted_counts;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(pred_dir, ec)) {
    const std::string name = entry.path().filename().string();
    const auto pos = name.rfind("_obj");
    if (pos == std::string::npos || entry.path().extension() != ".pgm") continue;
    ++predicted_counts[name.substr(0, pos)];
  }
  if (ec) throw Error(ErrorCode::kIoError, pred_dir.string() + ": " + ec.message());

  std::vector<SceneReport> reports;
  for (const auto& scene : scenes) {
    const auto it = predicted_counts.find(scene.id);
    if (it == predicted_counts.end()) continue;
    if (it->second != scene.truth.size()) {
      throw Error(ErrorCode::kManifestMismatch,
                  "scene " + scene.id + ": " + std::to_string(it->second) +
                      " predicted masks for " + std::to_string(scene.truth.size()) +
                      " truth masks");
    }
    std::vector<BinaryMask> predicted;
    for (std::size_t i = 0; i < it->second; ++i) {
      predicted.push_back(read_pgm(pred_dir / object_file(scene.id, i)));
    }
    reports.push_back(
        evaluate_scene(scene.id, predicted, scene.truth, scene.centroids, config.ray_count));
  }
  if (reports.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no predictions in " + pred_dir.string() +
                                              " match scenes in " + dataset_dir.string());
  }

  if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  const nlohmann::json report = report_to_json(reports);
  write_file_atomic(report_path, report.dump(1) + "\n");
  write_file_atomic(csv_report_path(report_path), report_to_csv(reports));
  log << "evaluated " << reports.size() << " scenes; DSC "
      << format_real(report["dsc"]["overall"]["mean"].get<double>()) << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation of overlapping objects with a learned shape prior", "multishape"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  struct Paths {
    std::string config, out, dataset, model, pred, report;
  } paths;
  std::vector<std::string> values(config_keys().size());
  std::vector<bool> flags(config_keys().size(), false);
  std::vector<std::vector<CLI::Option*>> key_options(config_keys().size());

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", paths.config, "flat key=value or JSON config file");
    for (std::size_t i = 0; i < config_keys().size(); ++i) {
      const auto& key = config_keys()[i];
      std::string names = "--" + key.name;
      std::string dashed = key.name;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key.name) names += ",--" + dashed;
      CLI::Option* opt = nullptr;
      if (key.boolean) {
        opt = sub->add_flag(names, [&flags, i](std::int64_t n) { flags[i] = n > 0; });
      } else {
        opt = sub->add_option(names, values[i]);
      }
      opt->group("Configuration keys");
      key_options[i].push_back(opt);
    }
  };

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  gen->add_option("--out", paths.out, "output dataset directory")->required();
  add_common(gen);

  auto* train = app.add_subcommand("train", "build a shape model from a dataset");
  train->add_option("--dataset", paths.dataset, "dataset directory")->required();
  train->add_option("--model", paths.model, "model JSON to write")->required();
  add_common(train);

  auto* seg = app.add_subcommand("segment", "segment every scene of a dataset");
  seg->add_option("--model", paths.model, "model JSON")->required();
  seg->add_option("--dataset", paths.dataset, "dataset directory")->required();
  seg->add_option("--out", paths.out, "prediction directory")->required();
  add_common(seg);

  auto* eval = app.add_subcommand("evaluate", "score predictions against ground truth");
  eval->add_option("--pred", paths.pred, "prediction directory")->required();
  eval->add_option("--dataset", paths.dataset, "dataset directory")->required();
  eval->add_option("--report", paths.report, "report JSON to write; CSV goes alongside")
      ->required();
  add_common(eval);

  auto fail = [&](std::string_view category, const std::string& message, int code) {
    err << "error:" << category << ": " << single_line(message) << "\n";
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitConfig);
  }

  try {
    RunConfig config;
    if (!paths.config.empty()) load_config_file(config, paths.config);
    if (const char* env = std::getenv("MULTISHAPE_SEED"); env != nullptr && *env != '\0') {
      config.set("seed", env);
    }
    for (std::size_t i = 0; i < config_keys().size(); ++i) {
      bool given = false;
      for (const auto* opt : key_options[i]) given = given || (opt->count() > 0);
      if (!given) continue;
      config.set(config_keys()[i].name, config_keys()[i].boolean ? (flags[i] ? "true" : "false")
                                                                  : values[i]);
    }
    config.finalize();

    if (gen->parsed()) cmd_generate(config, paths.out, out);
    if (train->parsed()) cmd_train(config, paths.dataset, paths.model, out);
    if (seg->parsed()) cmd_segment(config, paths.model, paths.dataset, paths.out, out);
    if (eval->parsed()) cmd_evaluate(config, paths.pred, paths.dataset, paths.report, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kExitConfig);
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(),
                e.code() == ErrorCode::kIoError ? kExitIo : kExitConfig);
  } catch (const fs::filesystem_error& e) {
    return fail("io_error", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kExitInternal);
  }
}

}  // namespace multishape::cli
