#pragma once

#include "mfm/types.hpp"

#include <cstdint>
#include <random>

namespace mfm {

using Rng = std::mt19937_64;

// Splittable seeding: independent streams derived from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

Mat gaussian_matrix(Rng& rng, Index rows, Index cols, double stddev = 1.0);
Mat sample_features(Rng& rng, FeatureDistribution dist, Index d, Index n);

}  // namespace mfm
