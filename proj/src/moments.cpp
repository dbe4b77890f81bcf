#include "mfm/moments.hpp"

#include "mfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfm {

MomentProfile profile_from_moments(Vec kappa, Vec phi, MomentSource source) {
  if (kappa.size() != phi.size() || kappa.size() == 0) {
    throw DimensionMismatch("moment profile: kappa and phi must be non-empty and equal length");
  }
  if (!kappa.allFinite() || !phi.allFinite()) {
    throw ValidationError("moment profile: non-finite moments");
  }
  MomentProfile out;
  out.tau = (phi.array() - 1.0 - kappa.array().square()).abs().matrix();
  out.p = std::max({1.0, kappa.cwiseAbs().maxCoeff(), (phi.array() - 3.0).abs().maxCoeff(),
                    (phi.array() - 1.0).abs().maxCoeff()});
  out.kappa = std::move(kappa);
  out.phi = std::move(phi);
  out.source = source;
  return out;
}

MomentProfile estimate_moments(const Mat& x) {
  const Index n = x.cols();
  if (n == 0) throw EmptyBatchError();
  if (n < 2) throw ValidationError("estimate_moments: need at least 2 instances");
  const auto squared = x.array().square();
  Vec kappa = (squared * x.array()).rowwise().mean().matrix();
  Vec phi = squared.square().rowwise().mean().matrix();
  return profile_from_moments(std::move(kappa), std::move(phi), MomentSource::EstimatedFromBatch);
}

MomentProfile analytic_profile(FeatureDistribution dist, Index d) {
  double fourth = 3.0;
  switch (dist) {
    case FeatureDistribution::Gaussian: fourth = 3.0; break;
    case FeatureDistribution::Rademacher: fourth = 1.0; break;
    // E x^4 for U[-a, a] is a^4 / 5 with a = sqrt(3).
    case FeatureDistribution::UniformUnitVariance: fourth = 9.0 / 5.0; break;
  }
  return profile_from_moments(Vec::Zero(d), Vec::Constant(d, fourth), MomentSource::Analytic);
}

bool mip_gate(const MomentProfile& profile, double tau_min) {
  return profile.tau.size() > 0 && profile.tau.minCoeff() >= tau_min;
}

EliminationCoefficients elimination_coefficients(const MomentProfile& profile, double tau_min) {
  const Index d = profile.dim();
  EliminationCoefficients out{Mat(d, 2), Mat(d, 2)};
  for (Index j = 0; j < d; ++j) {
    const double k = profile.kappa(j);
    const double f = profile.phi(j);
    const double det = f - 1.0 - k * k;
    if (!(std::abs(det) >= tau_min)) {
      throw SingularMomentSystemError(static_cast<std::size_t>(j), std::abs(det));
    }
    // inverse of [1, k; k, f - 1] is [f - 1, -k; -k, 1] / det
    out.g(j, 0) = ((f - 1.0) * k - k * (f - 3.0)) / det;
    out.g(j, 1) = (-k * k + (f - 3.0)) / det;
    out.h(j, 0) = (f - 1.0) / det;
    out.h(j, 1) = -k / det;
  }
  return out;
}

MomentProfile prepare_for_elimination(MomentProfile profile, double tau_min) {
  if (mip_gate(profile, tau_min)) {
    profile.coefficients = elimination_coefficients(profile, tau_min);
  } else {
    profile.coefficients.reset();
  }
  return profile;
}

StandardizationReport check_standardized(const Mat& x) {
  if (x.cols() == 0) throw EmptyBatchError();
  StandardizationReport out;
  out.mean = x.rowwise().mean();
  out.variance = (x.colwise() - out.mean).array().square().rowwise().mean().matrix();
  for (Index j = 0; j < x.rows(); ++j) {
    if (std::abs(out.mean(j)) > 0.1 || std::abs(out.variance(j) - 1.0) > 0.3) {
      out.offending.push_back(j);
    }
  }
  return out;
}

Standardizer fit_standardizer(const Mat& x) {
  if (x.cols() < 2) throw ValidationError("fit_standardizer: need at least 2 instances");
  Standardizer out;
  out.mean = x.rowwise().mean();
  const Vec var = (x.colwise() - out.mean).array().square().rowwise().sum().matrix() /
                  static_cast<double>(x.cols() - 1);
  out.scale = var.cwiseSqrt();
  for (Index j = 0; j < out.scale.size(); ++j) {
    if (!(out.scale(j) > 0.0)) {
      throw ValidationError("fit_standardizer: coordinate " + std::to_string(j) + " is constant");
    }
  }
  return out;
}

void Standardizer::apply(Mat& x) const {
  if (x.rows() != mean.size()) throw DimensionMismatch("Standardizer::apply: dimension mismatch");
  x = ((x.colwise() - mean).array().colwise() / scale.array()).matrix();
}

}  // namespace mfm
