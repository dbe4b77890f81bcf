#include "mfm/solver.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"
#include "trace_recorder.hpp"

#include <iostream>
#include <string>

namespace mfm {
namespace {

// Elimination maps of the generalized model: the moment profile corrects the
// diagonal bias of A'A.
class GeneralizedMaps {
 public:
  static constexpr Variant kVariant = Variant::GFM;

  GeneralizedMaps(const MomentProfile& profile, TraceCorrection correction)
      : profile_(profile), correction_(correction) {}

  Mat full(const Mat& x, const Vec& r) const { return m_operator(x, r, profile_, correction_); }
  Mat apply(const Mat& x, const Vec& r, const Mat& factor) const {
    return m_operator_apply(x, r, profile_, factor, correction_);
  }
  Vec weights(const Mat& x, const Vec& r) const { return w_operator(x, r, profile_); }

 private:
  const MomentProfile& profile_;
  TraceCorrection correction_;
};

// Diagonal-free maps. Holds no moment information.
class ImprovedMaps {
 public:
  static constexpr Variant kVariant = Variant::IFM;

  Mat full(const Mat& x, const Vec& r) const { return m_operator_ifm(x, r); }
  Mat apply(const Mat& x, const Vec& r, const Mat& factor) const {
    return m_operator_ifm_apply(x, r, factor);
  }
  Vec weights(const Mat& x, const Vec& r) const { return w_operator_ifm(x, r); }
};

void check_batch(const Batch& batch) {
  if (batch.size() == 0) throw EmptyBatchError();
  if (batch.y.size() != batch.size()) throw DimensionMismatch("batch: |y| != number of columns");
}

template <class Maps>
ModelState init_with(const Batch& batch, const Maps& maps, Index k) {
  check_batch(batch);
  if (k < 1 || k > batch.dim()) {
    throw ValidationError("init_state: rank k must be in [1, d], got " + std::to_string(k));
  }
  // yhat = 0 at initialization, so the residual is -y. The singular subspace
  // does not depend on its sign.
  const Mat m0 = maps.full(batch.x, -batch.y);
  ModelState state;
  state.variant = Maps::kVariant;
  state.u_bar = linalg::top_k_singvecs(m0, k);
  state.v = Mat::Zero(batch.dim(), k);
  state.w = Vec::Zero(batch.dim());
  state.iteration = 0;
  return state;
}

template <class Maps>
ModelState step_with(const ModelState& state, const Batch& batch, const Maps& maps) {
  check_batch(batch);
  if (state.variant != Maps::kVariant) {
    throw ValidationError("train_step: state variant does not match the update rule");
  }
  if (batch.dim() != state.dim()) throw DimensionMismatch("train_step: batch/model dimension");

  const Vec residual = predict(state, batch.x) - batch.y;
  const Mat u = state.v - maps.apply(batch.x, residual, state.u_bar);

  linalg::QrResult qr;
  try {
    qr = linalg::qr_thin(u);
  } catch (const DegenerateFactorError& e) {
    throw DegenerateFactorError(std::string("train_step: ") + e.what(), state.iteration + 1);
  }

  ModelState next;
  next.variant = state.variant;
  next.iteration = state.iteration + 1;
  next.v = state.v * (state.u_bar.transpose() * qr.q) - maps.apply(batch.x, residual, qr.q);
  next.u_bar = std::move(qr.q);
  next.w = state.w - maps.weights(batch.x, residual);
  return next;
}

void warn_if_not_standardized(const Mat& x) {
  const auto report = check_standardized(x);
  if (!report.ok()) {
    std::cerr << "warning: " << report.offending.size()
              << " coordinate(s) deviate from zero mean / unit variance (first: "
              << report.offending.front() << "); consider standardizing the data\n";
  }
}

template <class Maps>
TrainResult run(DataSource& source, const TrainConfig& config, const TrainContext& context,
                Batch first, const Maps& maps) {
  detail::TraceRecorder recorder(context);
  TrainResult result;
  result.state = init_with(first, maps, config.k);
  result.trace.push_back(recorder.record(result.state));
  if (recorder.should_stop(result.trace.back(), config)) return result;
  for (int t = 1; t <= config.iterations; ++t) {
    const Batch batch = source.next();
    result.state = step_with(result.state, batch, maps);
    result.trace.push_back(recorder.record(result.state));
    if (recorder.should_stop(result.trace.back(), config)) break;
  }
  return result;
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.k < 1) throw ValidationError("train config: k must be >= 1");
  if (config.iterations < 0) throw ValidationError("train config: iterations must be >= 0");
  if (config.batch_size < 0) throw ValidationError("train config: batch_size must be >= 0");
  if (!(config.tau_min > 0.0)) throw ValidationError("train config: tau_min must be > 0");
  if (config.variant == Variant::FMBaseline) {
    if (!(config.learning_rate > 0.0)) {
      throw PreconditionError("train config: learning_rate must be > 0 for the FM baseline");
    }
    if (!(config.init_scale > 0.0)) {
      throw PreconditionError("train config: init_scale must be > 0 for the FM baseline");
    }
  }
}

ModelState init_state_gfm(const Batch& batch, const MomentProfile& profile,
                          const TrainConfig& config) {
  return init_with(batch, GeneralizedMaps(profile, config.trace_correction), config.k);
}

ModelState init_state_ifm(const Batch& batch, const TrainConfig& config) {
  return init_with(batch, ImprovedMaps{}, config.k);
}

ModelState train_step_gfm(const ModelState& state, const Batch& batch,
                          const MomentProfile& profile, TraceCorrection correction) {
  return step_with(state, batch, GeneralizedMaps(profile, correction));
}

ModelState train_step_ifm(const ModelState& state, const Batch& batch) {
  return step_with(state, batch, ImprovedMaps{});
}

TrainResult train(DataSource& source, const TrainConfig& config, const TrainContext& context) {
  validate(config);
  if (config.variant == Variant::FMBaseline) return train_fm_baseline(source, config, context);

  Batch first = source.next();
  check_batch(first);
  warn_if_not_standardized(first.x);

  if (config.variant == Variant::IFM) {
    return run(source, config, context, std::move(first), ImprovedMaps{});
  }

  MomentProfile profile;
  if (context.profile) {
    profile = *context.profile;
  } else {
    profile = estimate_moments(first.x);
    if (config.moment_batch == MomentBatch::Dedicated) {
      first = source.next();
      check_batch(first);
    }
  }
  if (profile.dim() != first.dim()) throw DimensionMismatch("train: moment profile dimension");
  // Raises SingularMomentSystemError naming the offending coordinate.
  profile.coefficients = elimination_coefficients(profile, config.tau_min);

  TrainResult result = run(source, config, context, std::move(first),
                           GeneralizedMaps(profile, config.trace_correction));
  result.profile = std::move(profile);
  return result;
}

}  // namespace mfm
