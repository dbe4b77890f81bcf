#pragma once

// Independent reference implementations used as test oracles.

#include "mfm/rng.hpp"
#include "mfm/types.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mfm::testing {

inline Mat random_matrix(std::uint64_t seed, Index rows, Index cols) {
  Rng rng = make_rng(seed, 99);
  return gaussian_matrix(rng, rows, cols);
}

inline Vec random_vector(std::uint64_t seed, Index n) { return random_matrix(seed, n, 1).col(0); }

// Modified Gram-Schmidt with R diagonal >= 0.
inline void mgs_qr(const Mat& a, Mat& q, Mat& r) {
  const Index k = a.cols();
  q = a;
  r = Mat::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < j; ++i) {
      r(i, j) = q.col(i).dot(q.col(j));
      q.col(j) -= r(i, j) * q.col(i);
    }
    r(j, j) = q.col(j).norm();
    q.col(j) /= r(j, j);
  }
}

inline double dense_sigma1(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

inline Mat dense_top_left(const Mat& m, Index k) {
  return Eigen::JacobiSVD<Mat>(m, Eigen::ComputeFullU).matrixU().leftCols(k);
}

// sin of the largest canonical angle via projector difference.
inline double projector_sin(const Mat& u, const Mat& w) {
  return dense_sigma1(u * u.transpose() - w * w.transpose());
}

// x_i^T M x_i by explicit triple loop.
inline Vec triple_loop_a(const Mat& x, const Mat& m) {
  Vec out(x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    double s = 0.0;
    for (Index a = 0; a < x.rows(); ++a)
      for (Index b = 0; b < x.rows(); ++b) s += x(a, i) * m(a, b) * x(b, i);
    out(i) = s;
  }
  return out;
}

inline Mat rank_one_sum(const Mat& x, const Vec& z) {
  Mat out = Mat::Zero(x.rows(), x.rows());
  for (Index i = 0; i < x.cols(); ++i) out += z(i) * x.col(i) * x.col(i).transpose();
  return out;
}

inline double std_dev(const Vec& y) { return std::sqrt((y.array() - y.mean()).square().mean()); }

}  // namespace mfm::testing
