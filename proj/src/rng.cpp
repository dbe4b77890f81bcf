#include "mfm/rng.hpp"

#include <cmath>

namespace mfm {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a mix of both words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Mat gaussian_matrix(Rng& rng, Index rows, Index cols, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Mat out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

Mat sample_features(Rng& rng, FeatureDistribution dist, Index d, Index n) {
  switch (dist) {
    case FeatureDistribution::Gaussian:
      return gaussian_matrix(rng, d, n);
    case FeatureDistribution::Rademacher: {
      Mat out(d, n);
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < d; i += 64) {
          std::uint64_t bits = rng();
          for (Index b = i; b < std::min<Index>(i + 64, d); ++b, bits >>= 1) {
            out(b, j) = (bits & 1u) ? 1.0 : -1.0;
          }
        }
      }
      return out;
    }
    case FeatureDistribution::UniformUnitVariance: {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> uniform(-half_width, half_width);
      Mat out(d, n);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < d; ++i) out(i, j) = uniform(rng);
      return out;
    }
  }
  return Mat(d, n);
}

}  // namespace mfm
