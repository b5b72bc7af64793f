#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

namespace multishape::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIo = 3,
};

/// Scenes used for training. With folds > 1 the dataset is split into
/// contiguous folds; training normally uses every fold except `fold`, and with
/// `invert` only fold `fold`.
std::vector<std::size_t> training_indices(std::size_t scene_count, const RunConfig& config);
/// Complement of training_indices when folds > 1, otherwise every scene.
std::vector<std::size_t> testing_indices(std::size_t scene_count, const RunConfig& config);

void cmd_generate(const RunConfig& config, const std::filesystem::path& out_dir,
                  std::ostream& log);
void cmd_train(const RunConfig& config, const std::filesystem::path& dataset_dir,
               const std::filesystem::path& model_path, std::ostream& log);
void cmd_segment(const RunConfig& config, const std::filesystem::path& model_path,
                 const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir,
                 std::ostream& log);
void cmd_evaluate(const RunConfig& config, const std::filesystem::path& pred_dir,
                  const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& report_path, std::ostream& log);

/// Sibling files written next to a trained model.
std::filesystem::path manifest_path(const std::filesystem::path& model_path);
std::filesystem::path importance_history_path(const std::filesystem::path& model_path);
/// CSV export written next to a JSON report.
std::filesystem::path csv_report_path(const std::filesystem::path& report_path);

/// Full command line (args[0] is the program name). Errors are reported on
/// `err` as a single `error:<category>: message` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multishape::cli
