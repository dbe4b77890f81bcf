#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"
#include "mfm/operators.hpp"
#include "mfm/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace mfm {
namespace {

using testing::random_matrix;
using testing::random_vector;

MomentProfile gaussian_profile(Index d) {
  return prepare_for_elimination(analytic_profile(FeatureDistribution::Gaussian, d));
}

MomentProfile skewed_profile(Index d) {
  Vec kappa = random_vector(8, d) * 0.5;
  Vec phi = (random_vector(9, d).array().abs() + 3.0).matrix();
  return prepare_for_elimination(profile_from_moments(kappa, phi, MomentSource::Analytic));
}

TEST(ApplyA, Examples) {
  Mat x(2, 1);
  x << 1, 2;
  EXPECT_EQ(apply_a(x, Mat::Identity(2, 2))(0), 5.0);
  EXPECT_EQ(apply_a(x, Mat::Zero(2, 2)).norm(), 0.0);
}

TEST(ApplyA, MatchesTripleLoop) {
  const Mat x = random_matrix(2, 4, 3);
  const Mat m = random_matrix(12, 4, 4);
  EXPECT_LE((apply_a(x, m) - testing::triple_loop_a(x, m)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyA, SeesOnlySymmetricPart) {
  const Mat x = random_matrix(3, 6, 9);
  const Mat m = random_matrix(4, 6, 6);
  EXPECT_LE((apply_a(x, m) - apply_a(x, linalg::symmetric_part(m))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyA, DimensionMismatch) {
  EXPECT_THROW(apply_a(Mat::Ones(3, 2), Mat::Ones(2, 2)), DimensionMismatch);
  EXPECT_THROW(apply_a_adjoint(Mat::Ones(3, 2), Vec::Ones(3)), DimensionMismatch);
}

TEST(ApplyAFactored, MatchesDense) {
  const Mat x = random_matrix(5, 7, 11);
  const Mat l = random_matrix(6, 7, 2);
  const Mat r = random_matrix(7, 7, 2);
  const Mat m = l * r.transpose();
  EXPECT_LE((apply_a_factored(x, l, r, false) - apply_a(x, m)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((apply_a_factored(x, l, r, true) - apply_a(x, linalg::offdiag(m))).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(ApplyAAdjoint, Examples) {
  const Mat x = random_matrix(1, 3, 1);
  EXPECT_LE((apply_a_adjoint(x, Vec::Ones(1)) - x * x.transpose()).norm(), 1e-15);
  EXPECT_EQ(apply_a_adjoint(random_matrix(2, 3, 4), Vec::Zero(4)).norm(), 0.0);
}

TEST(ApplyAAdjoint, AdjointnessAndSymmetry) {
  const Mat x = random_matrix(3, 5, 4);
  const Mat m = random_matrix(4, 5, 5);
  const Vec z = random_vector(5, 4);
  const Mat adj = apply_a_adjoint(x, z);
  EXPECT_NEAR(apply_a(x, m).dot(z), (m.array() * adj.array()).sum(), 1e-12);
  EXPECT_EQ((adj - adj.transpose()).norm(), 0.0);
  EXPECT_LE((adj - testing::rank_one_sum(x, z)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(POperators, Examples) {
  Vec z(3);
  z << 1, 2, 3;
  EXPECT_EQ(p0(z), 2.0);
  Rng rng = make_rng(6, 0);
  const Mat pm = sample_features(rng, FeatureDistribution::Rademacher, 5, 9);
  EXPECT_EQ(p2(pm, random_vector(1, 9)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(POperators, MatchDirectSummation) {
  const Mat x = random_matrix(11, 3, 5);
  const Vec z = random_vector(4, 5);
  Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
  double mean = 0.0;
  for (Index i = 0; i < 5; ++i) mean += z(i) / 5.0;
  for (Index j = 0; j < 3; ++j) {
    for (Index i = 0; i < 5; ++i) {
      e1(j) += x(j, i) * z(i) / 5.0;
      e2(j) += x(j, i) * x(j, i) * z(i) / 5.0;
    }
    e2(j) -= mean;
  }
  EXPECT_NEAR(p0(z), mean, 1e-12);
  EXPECT_LE((p1(x, z) - e1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((p2(x, z) - e2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operators, Linearity) {
  const Mat x = random_matrix(1, 6, 20);
  const Vec a = random_vector(2, 20), b = random_vector(3, 20);
  const double s = 0.7, t = -1.3;
  const Vec c = s * a + t * b;
  const auto prof = skewed_profile(6);
  EXPECT_LE((apply_a_adjoint(x, c) - s * apply_a_adjoint(x, a) - t * apply_a_adjoint(x, b)).norm(),
            1e-12);
  EXPECT_NEAR(p0(c), s * p0(a) + t * p0(b), 1e-12);
  EXPECT_LE((p1(x, c) - s * p1(x, a) - t * p1(x, b)).norm(), 1e-12);
  EXPECT_LE((p2(x, c) - s * p2(x, a) - t * p2(x, b)).norm(), 1e-12);
  EXPECT_LE((m_operator(x, c, prof) - s * m_operator(x, a, prof) - t * m_operator(x, b, prof)).norm(),
            1e-12);
  EXPECT_LE((w_operator(x, c, prof) - s * w_operator(x, a, prof) - t * w_operator(x, b, prof)).norm(),
            1e-12);
  EXPECT_LE((m_operator_ifm(x, c) - s * m_operator_ifm(x, a) - t * m_operator_ifm(x, b)).norm(), 1e-12);
  const Mat m1 = random_matrix(4, 6, 6), m2 = random_matrix(5, 6, 6);
  EXPECT_LE((apply_a(x, s * m1 + t * m2) - s * apply_a(x, m1) - t * apply_a(x, m2)).norm(), 1e-12);
}

TEST(MOperator, ZeroResidual) {
  const Mat x = random_matrix(1, 4, 10);
  EXPECT_EQ(m_operator(x, Vec::Zero(10), gaussian_profile(4)).norm(), 0.0);
  EXPECT_EQ(w_operator(x, Vec::Zero(10), gaussian_profile(4)).norm(), 0.0);
  EXPECT_EQ(m_operator_ifm(x, Vec::Zero(10)).norm(), 0.0);
  EXPECT_EQ(w_operator_ifm(x, Vec::Zero(10)).norm(), 0.0);
}

TEST(MOperator, GaussianProfileReduces) {
  const Mat x = random_matrix(2, 5, 30);
  const Vec r = random_vector(3, 30);
  const auto prof = gaussian_profile(5);
  Mat expect = apply_a_adjoint(x, r) / 60.0;
  expect.diagonal().array() -= 0.5 * p0(r);
  EXPECT_LE((m_operator(x, r, prof) - expect).norm(), 1e-12);
  Mat printed = apply_a_adjoint(x, r) / 60.0;
  EXPECT_LE((m_operator(x, r, prof, TraceCorrection::AsPrinted) - printed).norm(), 1e-12);
  EXPECT_LE((w_operator(x, r, prof) - p1(x, r)).norm(), 1e-12);
}

TEST(MOperator, GeneralProfileFormula) {
  const Index d = 5;
  const Mat x = random_matrix(2, d, 30);
  const Vec r = random_vector(3, 30);
  const auto prof = skewed_profile(d);
  const auto& c = *prof.coefficients;
  const Vec a = p1(x, r), b = p2(x, r);
  Mat expect = apply_a_adjoint(x, r) / 60.0;
  for (Index j = 0; j < d; ++j) {
    expect(j, j) -= 0.5 * p0(r) + 0.5 * c.g(j, 0) * a(j) + 0.5 * c.g(j, 1) * b(j);
  }
  EXPECT_LE((m_operator(x, r, prof) - expect).norm(), 1e-12);
  const Vec wexp = (c.h.col(0).array() * a.array() + c.h.col(1).array() * b.array()).matrix();
  EXPECT_LE((w_operator(x, r, prof) - wexp).norm(), 1e-12);
}

TEST(MOperator, FactoredApplyMatchesDense) {
  const Index d = 7;
  const Mat x = random_matrix(2, d, 40);
  const Vec r = random_vector(3, 40);
  const Mat f = random_matrix(4, d, 3);
  const auto prof = skewed_profile(d);
  for (auto corr : {TraceCorrection::Corrected, TraceCorrection::AsPrinted}) {
    EXPECT_LE((m_operator_apply(x, r, prof, f, corr) - m_operator(x, r, prof, corr) * f).norm(), 1e-12);
  }
  EXPECT_LE((m_operator_ifm_apply(x, r, f) - m_operator_ifm(x, r) * f).norm(), 1e-12);
}

TEST(MOperator, MissingCoefficientsIsPrecondition) {
  const auto prof = analytic_profile(FeatureDistribution::Rademacher, 3);
  EXPECT_THROW(m_operator(Mat::Ones(3, 2), Vec::Ones(2), prof), PreconditionError);
  EXPECT_THROW(w_operator(Mat::Ones(3, 2), Vec::Ones(2), prof), PreconditionError);
}

TEST(MOperatorIfm, OffdiagAndDiagonalSource) {
  const Mat x = random_matrix(2, 5, 30);
  const Vec r = random_vector(3, 30);
  const Mat out = m_operator_ifm(x, r);
  EXPECT_EQ(out.diagonal().norm(), 0.0);
  EXPECT_LE((out - linalg::offdiag(apply_a_adjoint(x, r) / 60.0)).norm(), 1e-12);
  EXPECT_LE((w_operator_ifm(x, r) - p1(x, r)).norm(), 1e-12);

  // Residual generated by a purely diagonal error on +-1 data is constant.
  Rng rng = make_rng(4, 0);
  const Mat pm = sample_features(rng, FeatureDistribution::Rademacher, 5, 30);
  Mat diag = Mat::Zero(5, 5);
  diag.diagonal() << 1, -2, 0.5, 0.25, 0.25;
  const Vec rd = apply_a(pm, diag);
  EXPECT_LE(m_operator_ifm(pm, rd).norm(), 1e-12);
}

TEST(BernoulliIdentity, DiagonalShiftAddsTrace) {
  Rng rng = make_rng(8, 0);
  const Mat x = sample_features(rng, FeatureDistribution::Rademacher, 6, 25);
  const Mat m = random_matrix(1, 6, 6);
  Mat diag = Mat::Zero(6, 6);
  diag.diagonal() = random_vector(2, 6);
  const Vec shifted = apply_a(x, m + diag);
  const Vec expect = apply_a(x, m).array() + diag.trace();
  EXPECT_LE((shifted - expect).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace mfm
