#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

namespace mfm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Feature distributions used by the synthetic generators. All are zero mean
// and unit variance per coordinate.
enum class FeatureDistribution { Gaussian, Rademacher, UniformUnitVariance };

enum class Variant { GFM, IFM, FMBaseline };

// A mini-batch: columns of `x` are instances, `y` holds one label per column.
struct Batch {
  Mat x;
  Vec y;

  Index dim() const { return x.rows(); }
  Index size() const { return x.cols(); }
};

std::string_view to_string(FeatureDistribution dist);
std::string_view to_string(Variant variant);
FeatureDistribution parse_distribution(std::string_view text);
Variant parse_variant(std::string_view text);

}  // namespace mfm
