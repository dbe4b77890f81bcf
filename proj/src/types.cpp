#include "mfm/types.hpp"

#include "mfm/errors.hpp"

#include <string>

namespace mfm {

std::string_view to_string(FeatureDistribution dist) {
  switch (dist) {
    case FeatureDistribution::Gaussian: return "gaussian";
    case FeatureDistribution::Rademacher: return "rademacher";
    case FeatureDistribution::UniformUnitVariance: return "uniform";
  }
  return "unknown";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::GFM: return "gfm";
    case Variant::IFM: return "ifm";
    case Variant::FMBaseline: return "fm-baseline";
  }
  return "unknown";
}

FeatureDistribution parse_distribution(std::string_view text) {
  if (text == "gaussian") return FeatureDistribution::Gaussian;
  if (text == "rademacher") return FeatureDistribution::Rademacher;
  if (text == "uniform" || text == "uniform-unit-variance") {
    return FeatureDistribution::UniformUnitVariance;
  }
  throw ValidationError("unknown feature distribution '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "gfm") return Variant::GFM;
  if (text == "ifm") return Variant::IFM;
  if (text == "fm-baseline" || text == "fm") return Variant::FMBaseline;
  throw ValidationError("unknown variant '" + std::string(text) + "'");
}

}  // namespace mfm
