#pragma once

// Experiment configuration: one JSON file, every CLI flag overrides the
// matching field.

#include "mfm/diagnostics.hpp"
#include "mfm/solver.hpp"
#include "mfm/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mfm::cli {

struct DiagnosticsConfig {
  Index d = 30;
  Index k = 3;
  std::vector<Index> n_list{2000, 8000};
  int trials = 20;
  diagnostics::RatioBand band;
  FeatureDistribution x_dist = FeatureDistribution::Gaussian;
  // Elimination check.
  Index elim_n = 20000;
  int elim_trials = 50;
  std::vector<double> elim_traces{0.0, 0.5, 1.0, 2.0};
  // Bernoulli degeneracy check.
  Index bernoulli_d = 20;
  Index bernoulli_n = 500;
  int bernoulli_trials = 20;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::optional<std::uint64_t> seed;
  SynthSpec synth;
  Index n_train = 15000;
  Index n_test = 10000;
  TrainConfig train;
  bool k_set = false;  // train.k given explicitly
  DiagnosticsConfig diagnostics;
  std::filesystem::path out_dir = "out";
  bool deterministic = true;
};

// Named settings: fig1a, fig1b, fig1c, custom, rip, elim, bernoulli, moments.
ExperimentConfig preset(const std::string& name);
bool is_diagnostic_name(const std::string& name);

// Overlays the fields present in `j`; unknown keys are rejected.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

// Model rank: explicit train.k, else the identifiable rank of the planted
// model (2k for asymmetric forms).
Index model_rank(const ExperimentConfig& config, const GroundTruth& truth);

std::uint64_t require_seed(const ExperimentConfig& config);

}  // namespace mfm::cli
