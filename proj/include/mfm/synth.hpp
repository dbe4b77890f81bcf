#pragma once

#include "mfm/data_source.hpp"
#include "mfm/model.hpp"
#include "mfm/types.hpp"

#include <cstdint>

namespace mfm {

enum class MStarForm {
  PsdMinusDiag,    // U U^T - diag(U U^T)
  AsymMinusDiag,   // U V^T - diag(U V^T)
  GeneralLowRank,  // U V^T
  SymLowRank,      // U diag(s) U^T with random signs s
};

struct SynthSpec {
  Index d = 100;
  Index k = 5;
  MStarForm m_star_form = MStarForm::PsdMinusDiag;
  FeatureDistribution x_dist = FeatureDistribution::Gaussian;
  bool flip_labels = false;
  double noise_std = 0.0;
  std::uint64_t seed = 1;
};

// Sub-seed streams. Truth, train and test data never share a stream, so
// changing n leaves the planted model untouched.
namespace streams {
inline constexpr std::uint64_t kTruth = 0;
inline constexpr std::uint64_t kTrain = 1;
inline constexpr std::uint64_t kTest = 2;
inline constexpr std::uint64_t kFreshBase = 1000;
}  // namespace streams

std::string_view to_string(MStarForm form);
MStarForm parse_m_star_form(std::string_view text);

GroundTruth gen_truth(const SynthSpec& spec);
Batch gen_batch(const GroundTruth& truth, const SynthSpec& spec, Index n, std::uint64_t stream);

// Fresh i.i.d. batches, one sub-seed stream per call.
class FreshBatchSource final : public DataSource {
 public:
  FreshBatchSource(GroundTruth truth, SynthSpec spec, Index batch_size,
                   std::uint64_t first_stream = streams::kFreshBase);

  Batch next() override;
  Index dim() const override { return spec_.d; }

 private:
  GroundTruth truth_;
  SynthSpec spec_;
  Index batch_size_;
  std::uint64_t stream_;
};

}  // namespace mfm
