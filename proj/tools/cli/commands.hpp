#pragma once

#include "cli/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace mfm::cli {

struct TrainPaths {
  std::filesystem::path train_data;
  std::optional<std::filesystem::path> test_data;
  std::filesystem::path model_out = "model.mfm";
  std::filesystem::path trace_out = "trace.csv";
};

// Writes train.mfm, test.mfm, truth_model.mfm (and train.csv) to out_dir.
void cmd_gen(const ExperimentConfig& config, bool write_csv);

TrainResult cmd_train(const ExperimentConfig& config, const TrainPaths& paths);

nlohmann::json cmd_eval(const std::filesystem::path& model, const std::filesystem::path& data,
                        const std::optional<std::filesystem::path>& out);

// Runs the diagnostic named by config.name; writes <name>.json and <name>.csv
// to out_dir. Returns the report; "pass" holds the band verdict.
nlohmann::json cmd_diagnose(const ExperimentConfig& config);

// Paired iFM / FM-baseline runs on one generated dataset (or a diagnostic).
nlohmann::json cmd_experiment(const ExperimentConfig& config);

}  // namespace mfm::cli
