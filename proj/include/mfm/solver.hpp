#pragma once

// Alternating gradient descent with high-order moment elimination (gFM and
// iFM), and the conventional FM gradient-descent baseline.

#include "mfm/data_source.hpp"
#include "mfm/model.hpp"
#include "mfm/moments.hpp"
#include "mfm/operators.hpp"
#include "mfm/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mfm {

enum class SamplingMode { FreshBatches, FixedDatasetCycling };
enum class MomentBatch { Dedicated, Reuse };

struct TrainConfig {
  Index k = 5;
  Index batch_size = 0;  // 0: whole dataset per step
  int iterations = 200;
  Variant variant = Variant::IFM;
  SamplingMode sampling_mode = SamplingMode::FixedDatasetCycling;
  double tau_min = kDefaultTauMin;
  std::uint64_t seed = 1;
  TraceCorrection trace_correction = TraceCorrection::Corrected;
  MomentBatch moment_batch = MomentBatch::Dedicated;

  // FM baseline only.
  double learning_rate = 0.1;
  double init_scale = 1.0;
  bool halve_on_divergence = true;

  // Stop when test RMSE has not improved by 1e-8 over 10 iterations.
  bool early_stop = false;
  // Stop once recovery_error < stop_relative_error * eps_0 (needs truth).
  std::optional<double> stop_relative_error;
};

void validate(const TrainConfig& config);

struct TraceRecord {
  int iteration = 0;
  std::optional<double> test_rmse;
  std::optional<double> recovery_error;
  std::optional<double> sin_theta;
  double wall_ms = 0.0;
};

// Optional evaluation inputs for train().
struct TrainContext {
  const Batch* test = nullptr;
  const GroundTruth* truth = nullptr;
  // Known moments for gFM; estimated from the data source when absent.
  std::optional<MomentProfile> profile;
};

struct TrainResult {
  ModelState state;
  std::vector<TraceRecord> trace;
  std::optional<MomentProfile> profile;  // gFM only
  double final_learning_rate = 0.0;      // FM baseline only
};

// ---- Algorithm steps -------------------------------------------------------

// w = 0, V = 0, u_bar = top-k singular vectors of M(-y).
ModelState init_state_gfm(const Batch& batch, const MomentProfile& profile,
                          const TrainConfig& config);
ModelState init_state_ifm(const Batch& batch, const TrainConfig& config);

ModelState train_step_gfm(const ModelState& state, const Batch& batch,
                          const MomentProfile& profile,
                          TraceCorrection correction = TraceCorrection::Corrected);
ModelState train_step_ifm(const ModelState& state, const Batch& batch);

TrainResult train(DataSource& source, const TrainConfig& config, const TrainContext& context = {});

// ---- Conventional FM baseline ---------------------------------------------

// (1/2n) ||X^T w + A(offdiag(U U^T)) - y||^2
double fm_loss(const Vec& w, const Mat& u, const Batch& batch);

struct FmGradient {
  Vec w;
  Mat u;
};
FmGradient fm_gradient(const Vec& w, const Mat& u, const Batch& batch);

ModelState init_state_fm(Index d, const TrainConfig& config);

TrainResult train_fm_baseline(DataSource& source, const TrainConfig& config,
                              const TrainContext& context = {});

}  // namespace mfm
