#pragma once

#include "mfm/model.hpp"
#include "mfm/solver.hpp"

#include <chrono>

namespace mfm::detail {

// Builds per-iteration trace records and enforces finiteness.
class TraceRecorder {
 public:
  explicit TraceRecorder(const TrainContext& context);

  TraceRecord record(const ModelState& state);
  // eps_0 of the first record, if ground truth is available.
  std::optional<double> initial_error() const { return initial_error_; }
  // Early-stop bookkeeping; true when training should end after `rec`.
  bool should_stop(const TraceRecord& rec, const TrainConfig& config);

 private:
  const TrainContext& context_;
  std::chrono::steady_clock::time_point start_;
  std::optional<double> initial_error_;
  double best_rmse_ = 0.0;
  int best_iteration_ = 0;
  bool have_best_ = false;
};

}  // namespace mfm::detail
