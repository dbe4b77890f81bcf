#include "trace_recorder.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"

#include <cmath>
#include <string>

namespace mfm::detail {

TraceRecorder::TraceRecorder(const TrainContext& context)
    : context_(context), start_(std::chrono::steady_clock::now()) {}

TraceRecord TraceRecorder::record(const ModelState& state) {
  TraceRecord rec;
  rec.iteration = state.iteration;
  if (context_.test != nullptr) {
    rec.test_rmse = rmse(predict(state, context_.test->x), context_.test->y);
    if (!std::isfinite(*rec.test_rmse)) {
      throw NonFiniteError("test RMSE became non-finite at iteration " +
                           std::to_string(state.iteration));
    }
  }
  if (context_.truth != nullptr) {
    if (!state.w.allFinite() || !state.u_bar.allFinite() || !state.v.allFinite()) {
      throw NonFiniteError("model parameters became non-finite at iteration " +
                           std::to_string(state.iteration));
    }
    rec.recovery_error = recovery_error(state, *context_.truth);
    if (!initial_error_) initial_error_ = rec.recovery_error;
    const Mat& basis = context_.truth->factor_basis;
    if (basis.cols() == state.rank()) {
      try {
        const Mat q = state.variant == Variant::FMBaseline ? linalg::qr_thin(state.u_bar).q
                                                           : state.u_bar;
        rec.sin_theta = linalg::sin_canonical_angle(q, basis);
      } catch (const DegenerateFactorError&) {
      }
    }
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  return rec;
}

bool TraceRecorder::should_stop(const TraceRecord& rec, const TrainConfig& config) {
  if (config.stop_relative_error && rec.recovery_error && initial_error_ &&
      *rec.recovery_error < *config.stop_relative_error * *initial_error_) {
    return true;
  }
  if (config.early_stop && rec.test_rmse) {
    if (!have_best_ || *rec.test_rmse < best_rmse_ - 1e-8) {
      best_rmse_ = *rec.test_rmse;
      best_iteration_ = rec.iteration;
      have_best_ = true;
    } else if (rec.iteration - best_iteration_ >= 10) {
      return true;
    }
  }
  return false;
}

}  // namespace mfm::detail
