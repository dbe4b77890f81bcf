#include "mfm/synth.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"
#include "mfm/operators.hpp"
#include "mfm/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace mfm {
namespace {

void validate(const SynthSpec& spec) {
  if (spec.d < 1 || spec.k < 1 || spec.k > spec.d) {
    throw ValidationError("synth spec: need 1 <= k <= d, got d=" + std::to_string(spec.d) +
                          " k=" + std::to_string(spec.k));
  }
  if (!(spec.noise_std >= 0.0)) throw ValidationError("synth spec: noise_std must be >= 0");
}

bool symmetric_form(MStarForm form) {
  return form == MStarForm::PsdMinusDiag || form == MStarForm::SymLowRank;
}

}  // namespace

std::string_view to_string(MStarForm form) {
  switch (form) {
    case MStarForm::PsdMinusDiag: return "psd-minus-diag";
    case MStarForm::AsymMinusDiag: return "asym-minus-diag";
    case MStarForm::GeneralLowRank: return "general-low-rank";
    case MStarForm::SymLowRank: return "sym-low-rank";
  }
  return "unknown";
}

MStarForm parse_m_star_form(std::string_view text) {
  if (text == "psd-minus-diag") return MStarForm::PsdMinusDiag;
  if (text == "asym-minus-diag") return MStarForm::AsymMinusDiag;
  if (text == "general-low-rank") return MStarForm::GeneralLowRank;
  if (text == "sym-low-rank") return MStarForm::SymLowRank;
  throw ValidationError("unknown m_star_form '" + std::string(text) + "'");
}

GroundTruth gen_truth(const SynthSpec& spec) {
  validate(spec);
  constexpr int kAttempts = 5;
  const double stddev = 1.0 / std::sqrt(static_cast<double>(spec.d));
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng = make_rng(spec.seed + static_cast<std::uint64_t>(attempt), streams::kTruth);
    GroundTruth truth;
    truth.w_star = gaussian_matrix(rng, spec.d, 1, stddev).col(0);
    const Mat u = gaussian_matrix(rng, spec.d, spec.k, stddev);
    const Mat v = gaussian_matrix(rng, spec.d, spec.k, stddev);

    truth.left = u;
    switch (spec.m_star_form) {
      case MStarForm::PsdMinusDiag:
        truth.right = u;
        truth.zero_diagonal = true;
        break;
      case MStarForm::AsymMinusDiag:
        truth.right = v;
        truth.zero_diagonal = true;
        break;
      case MStarForm::GeneralLowRank:
        truth.right = v;
        break;
      case MStarForm::SymLowRank: {
        Vec signs(spec.k);
        for (Index j = 0; j < spec.k; ++j) signs(j) = (rng() & 1u) ? 1.0 : -1.0;
        truth.right = u * signs.asDiagonal();
        break;
      }
    }
    const Mat raw = truth.left * truth.right.transpose();
    truth.m_star = truth.zero_diagonal ? linalg::offdiag(raw) : raw;

    // sym(U V^T) lives in span[U V], so asymmetric forms identify up to 2k
    // directions.
    if (symmetric_form(spec.m_star_form) || 2 * spec.k > spec.d) {
      truth.factor_basis = linalg::orthonormalize(u);
    } else {
      Mat both(spec.d, 2 * spec.k);
      both << u, v;
      truth.factor_basis = linalg::orthonormalize(both);
    }

    const Vec sv = Eigen::JacobiSVD<Mat>(truth.m_star).singularValues();
    if (!(sv(spec.k - 1) >= 1e-10)) continue;
    truth.singular_values = sv.head(truth.factor_basis.cols());
    return truth;
  }
  throw NumericalError("gen_truth: sigma_k(M*) < 1e-10 after " + std::to_string(kAttempts) +
                       " attempts");
}

Batch gen_batch(const GroundTruth& truth, const SynthSpec& spec, Index n, std::uint64_t stream) {
  if (n < 1) throw ValidationError("gen_batch: n must be >= 1");
  if (truth.dim() != spec.d) throw DimensionMismatch("gen_batch: truth/spec dimension mismatch");
  Rng rng = make_rng(spec.seed, stream);
  Batch batch;
  batch.x = sample_features(rng, spec.x_dist, spec.d, n);
  batch.y = batch.x.transpose() * truth.w_star;
  if (truth.left.size() > 0) {
    batch.y += apply_a_factored(batch.x, truth.left, truth.right, truth.zero_diagonal);
  } else {
    batch.y += apply_a(batch.x, truth.m_star);
  }
  if (spec.noise_std > 0.0) batch.y += gaussian_matrix(rng, n, 1, spec.noise_std).col(0);
  if (spec.flip_labels) batch.y = -batch.y;
  return batch;
}

FreshBatchSource::FreshBatchSource(GroundTruth truth, SynthSpec spec, Index batch_size,
                                   std::uint64_t first_stream)
    : truth_(std::move(truth)), spec_(spec), batch_size_(batch_size), stream_(first_stream) {
  if (batch_size_ < 1) throw ValidationError("FreshBatchSource: batch size must be >= 1");
}

Batch FreshBatchSource::next() { return gen_batch(truth_, spec_, batch_size_, stream_++); }

}  // namespace mfm
