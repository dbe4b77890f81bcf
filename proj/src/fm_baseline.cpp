#include "mfm/errors.hpp"
#include "mfm/operators.hpp"
#include "mfm/rng.hpp"
#include "mfm/solver.hpp"
#include "trace_recorder.hpp"

#include <cmath>
#include <string>

namespace mfm {
namespace {

inline constexpr std::uint64_t kFmInitStream = 7;
inline constexpr int kMaxHalvings = 30;
inline constexpr int kMaxConsecutiveIncreases = 10;

void check_shapes(const Vec& w, const Mat& u, const Batch& batch) {
  if (batch.size() == 0) throw EmptyBatchError();
  if (w.size() != batch.dim() || u.rows() != batch.dim()) {
    throw DimensionMismatch("fm: parameter dimension does not match the batch");
  }
}

Vec fm_residual(const Vec& w, const Mat& u, const Batch& batch) {
  return batch.x.transpose() * w + apply_a_factored(batch.x, u, u, true) - batch.y;
}

}  // namespace

double fm_loss(const Vec& w, const Mat& u, const Batch& batch) {
  check_shapes(w, u, batch);
  return fm_residual(w, u, batch).squaredNorm() / (2.0 * static_cast<double>(batch.size()));
}

FmGradient fm_gradient(const Vec& w, const Mat& u, const Batch& batch) {
  check_shapes(w, u, batch);
  const double n = static_cast<double>(batch.size());
  const Vec r = fm_residual(w, u, batch);
  const Mat xtu = batch.x.transpose() * u;  // n x k
  const Vec sq = batch.x.array().square().matrix() * r;
  FmGradient g;
  g.w = batch.x * r / n;
  g.u = (2.0 / n) * (batch.x * (r.asDiagonal() * xtu) - sq.asDiagonal() * u);
  return g;
}

ModelState init_state_fm(Index d, const TrainConfig& config) {
  if (config.k < 1 || config.k > d) {
    throw ValidationError("init_state_fm: rank k must be in [1, d], got " + std::to_string(config.k));
  }
  Rng rng = make_rng(config.seed, kFmInitStream);
  ModelState state;
  state.variant = Variant::FMBaseline;
  state.w = Vec::Zero(d);
  state.u_bar = gaussian_matrix(rng, d, config.k,
                                config.init_scale / std::sqrt(static_cast<double>(d * config.k)));
  state.v = Mat::Zero(d, 0);
  return state;
}

TrainResult train_fm_baseline(DataSource& source, const TrainConfig& config,
                              const TrainContext& context) {
  validate(config);
  detail::TraceRecorder recorder(context);
  TrainResult result;
  result.state = init_state_fm(source.dim(), config);
  result.trace.push_back(recorder.record(result.state));

  double lr = config.learning_rate;
  int halvings = 0;
  int increases = 0;
  ModelState best = result.state;
  double best_loss = INFINITY;

  auto halve = [&](const std::string& reason) {
    if (!config.halve_on_divergence || ++halvings > kMaxHalvings) {
      throw StepSizeError("fm baseline diverged (" + reason + ") at learning rate " +
                          std::to_string(lr));
    }
    lr *= 0.5;
  };

  if (!recorder.should_stop(result.trace.back(), config)) {
    for (int t = 1; t <= config.iterations; ++t) {
      const Batch batch = source.next();
      ModelState& s = result.state;
      const double loss = fm_loss(s.w, s.u_bar, batch);
      if (loss < best_loss) {
        best_loss = loss;
        best = s;
      }
      const FmGradient g = fm_gradient(s.w, s.u_bar, batch);
      const Vec w_next = s.w - lr * g.w;
      const Mat u_next = s.u_bar - lr * g.u;
      const double next_loss = fm_loss(w_next, u_next, batch);

      if (!std::isfinite(next_loss)) {
        halve("non-finite loss");
        increases = 0;
        s.w = best.w;
        s.u_bar = best.u_bar;
      } else {
        increases = next_loss > loss ? increases + 1 : 0;
        s.w = w_next;
        s.u_bar = u_next;
        if (increases >= kMaxConsecutiveIncreases) {
          halve("loss increased for " + std::to_string(increases) + " steps");
          increases = 0;
          s.w = best.w;
          s.u_bar = best.u_bar;
        }
      }
      s.iteration = t;
      result.trace.push_back(recorder.record(s));
      if (recorder.should_stop(result.trace.back(), config)) break;
    }
  }
  result.final_learning_rate = lr;
  return result;
}

}  // namespace mfm
