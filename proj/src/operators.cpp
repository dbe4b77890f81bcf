#include "mfm/operators.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"

#include <cmath>
#include <string>

namespace mfm {
namespace {

void check_residual(const Mat& x, const Vec& z, const char* op) {
  if (x.cols() != z.size()) {
    throw DimensionMismatch(std::string(op) + ": batch has " + std::to_string(x.cols()) +
                            " instances but vector has " + std::to_string(z.size()));
  }
  if (x.cols() == 0) throw EmptyBatchError();
}

void check_square(const Mat& x, const Mat& m, const char* op) {
  if (m.rows() != x.rows() || m.cols() != x.rows()) {
    throw DimensionMismatch(std::string(op) + ": matrix must be " + std::to_string(x.rows()) +
                            "x" + std::to_string(x.rows()));
  }
}

void check_factor(const Mat& x, const Mat& factor, const char* op) {
  if (factor.rows() != x.rows()) {
    throw DimensionMismatch(std::string(op) + ": factor must have " + std::to_string(x.rows()) +
                            " rows");
  }
}

const EliminationCoefficients& require_coefficients(const MomentProfile& profile, Index d,
                                                    const char* op) {
  if (!profile.coefficients) {
    throw PreconditionError(std::string(op) +
                            ": moment profile has no elimination coefficients (MIP gate failed "
                            "or profile not prepared)");
  }
  if (profile.dim() != d) throw DimensionMismatch(std::string(op) + ": profile dimension mismatch");
  return *profile.coefficients;
}

// Neumaier-compensated sum of (weights o z) over columns, one sum per row.
Vec compensated_row_sums(const Mat& x, const Vec& z, bool square) {
  const Index d = x.rows();
  Vec sum = Vec::Zero(d);
  Vec comp = Vec::Zero(d);
  for (Index i = 0; i < x.cols(); ++i) {
    const double zi = z(i);
    for (Index j = 0; j < d; ++j) {
      const double xv = x(j, i);
      const double term = (square ? xv * xv : xv) * zi;
      const double t = sum(j) + term;
      if (std::abs(sum(j)) >= std::abs(term)) {
        comp(j) += (sum(j) - t) + term;
      } else {
        comp(j) += (term - t) + sum(j);
      }
      sum(j) = t;
    }
  }
  return sum + comp;
}

// G_1 o P1(r) + G_2 o P2(r), the diagonal correction of the M map.
Vec diagonal_correction(const Mat& x, const Vec& r, const Mat& coeff) {
  return coeff.col(0).cwiseProduct(p1(x, r)) + coeff.col(1).cwiseProduct(p2(x, r));
}

}  // namespace

Vec apply_a(const Mat& x, const Mat& m) {
  check_square(x, m, "apply_a");
  return (m * x).cwiseProduct(x).colwise().sum().transpose();
}

Mat apply_a_adjoint(const Mat& x, const Vec& z) {
  check_residual(x, z, "apply_a_adjoint");
  const Mat weighted = x * z.asDiagonal();
  Mat out = weighted * x.transpose();
  return linalg::symmetric_part(out);
}

double p0(const Vec& z) {
  if (z.size() == 0) throw EmptyBatchError();
  double sum = 0.0;
  double comp = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double t = sum + z(i);
    comp += std::abs(sum) >= std::abs(z(i)) ? (sum - t) + z(i) : (z(i) - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(z.size());
}

Vec p1(const Mat& x, const Vec& z) {
  check_residual(x, z, "p1");
  return compensated_row_sums(x, z, false) / static_cast<double>(x.cols());
}

Vec p2(const Mat& x, const Vec& z) {
  check_residual(x, z, "p2");
  const Vec second = compensated_row_sums(x, z, true) / static_cast<double>(x.cols());
  return second.array() - p0(z);
}

Mat m_operator(const Mat& x, const Vec& residual, const MomentProfile& profile,
               TraceCorrection correction) {
  check_residual(x, residual, "m_operator");
  const auto& coeff = require_coefficients(profile, x.rows(), "m_operator");
  const double n = static_cast<double>(x.cols());
  Mat out = apply_a_adjoint(x, residual) / (2.0 * n);
  if (correction == TraceCorrection::Corrected) {
    out.diagonal().array() -= 0.5 * p0(residual);
  }
  out.diagonal() -= 0.5 * diagonal_correction(x, residual, coeff.g);
  return out;
}

Vec w_operator(const Mat& x, const Vec& residual, const MomentProfile& profile) {
  check_residual(x, residual, "w_operator");
  const auto& coeff = require_coefficients(profile, x.rows(), "w_operator");
  return diagonal_correction(x, residual, coeff.h);
}

Mat m_operator_ifm(const Mat& x, const Vec& residual) {
  check_residual(x, residual, "m_operator_ifm");
  Mat out = apply_a_adjoint(x, residual) / (2.0 * static_cast<double>(x.cols()));
  out.diagonal().setZero();
  return out;
}

Vec w_operator_ifm(const Mat& x, const Vec& residual) { return p1(x, residual); }

Mat m_operator_apply(const Mat& x, const Vec& residual, const MomentProfile& profile,
                     const Mat& factor, TraceCorrection correction) {
  check_residual(x, residual, "m_operator_apply");
  check_factor(x, factor, "m_operator_apply");
  const auto& coeff = require_coefficients(profile, x.rows(), "m_operator_apply");
  const double n = static_cast<double>(x.cols());
  const Mat projected = residual.asDiagonal() * (x.transpose() * factor);
  Mat out = x * projected / (2.0 * n);
  if (correction == TraceCorrection::Corrected) out -= 0.5 * p0(residual) * factor;
  out -= 0.5 * diagonal_correction(x, residual, coeff.g).asDiagonal() * factor;
  return out;
}

Mat m_operator_ifm_apply(const Mat& x, const Vec& residual, const Mat& factor) {
  check_residual(x, residual, "m_operator_ifm_apply");
  check_factor(x, factor, "m_operator_ifm_apply");
  const double n = static_cast<double>(x.cols());
  const Mat projected = residual.asDiagonal() * (x.transpose() * factor);
  const Vec diag = x.array().square().matrix() * residual / (2.0 * n);
  return x * projected / (2.0 * n) - diag.asDiagonal() * factor;
}

Vec apply_a_factored(const Mat& x, const Mat& left, const Mat& right, bool zero_diagonal) {
  if (left.rows() != x.rows() || right.rows() != x.rows() || left.cols() != right.cols()) {
    throw DimensionMismatch("apply_a_factored: factor shapes do not match the batch");
  }
  const Mat lx = left.transpose() * x;
  const Mat rx = right.transpose() * x;
  Vec out = lx.cwiseProduct(rx).colwise().sum().transpose();
  if (zero_diagonal) {
    const Vec diag = left.cwiseProduct(right).rowwise().sum();
    out -= x.array().square().matrix().transpose() * diag;
  }
  return out;
}

}  // namespace mfm
