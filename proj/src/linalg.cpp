#include "mfm/linalg.hpp"

#include "mfm/errors.hpp"
#include "mfm/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mfm::linalg {
namespace {

struct Householder {
  Mat r;                     // n x n upper triangular
  std::vector<Vec> vectors;  // reflector j acts on rows j..m-1
  std::vector<double> betas;
};

Householder householder(const Mat& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  Mat work = a;
  Householder out;
  out.vectors.reserve(n);
  out.betas.reserve(n);
  for (Index j = 0; j < n; ++j) {
    Vec v = work.col(j).tail(m - j);
    const double alpha = v.norm();
    double beta = 0.0;
    if (alpha > 0.0) {
      v(0) += v(0) >= 0.0 ? alpha : -alpha;
      const double vv = v.squaredNorm();
      beta = vv > 0.0 ? 2.0 / vv : 0.0;
    }
    if (beta != 0.0) {
      auto block = work.bottomRightCorner(m - j, n - j);
      const Eigen::RowVectorXd proj = v.transpose() * block;
      block.noalias() -= beta * v * proj;
    }
    out.vectors.push_back(std::move(v));
    out.betas.push_back(beta);
  }
  out.r = work.topRows(n).triangularView<Eigen::Upper>();
  return out;
}

Mat explicit_q(const Householder& h, Index m) {
  const Index n = static_cast<Index>(h.vectors.size());
  Mat q = Mat::Identity(m, n);
  for (Index j = n - 1; j >= 0; --j) {
    if (h.betas[j] == 0.0) continue;
    const Vec& v = h.vectors[j];
    auto block = q.bottomRows(m - j);
    const Eigen::RowVectorXd proj = v.transpose() * block;
    block.noalias() -= h.betas[j] * v * proj;
  }
  return q;
}

void require_finite(const Mat& m, const char* what) {
  if (!all_finite(m)) throw ValidationError(std::string(what) + ": non-finite entries");
}

}  // namespace

bool all_finite(const Mat& m) { return m.allFinite(); }

QrResult qr_thin(const Mat& a) {
  require_finite(a, "qr_thin");
  if (a.cols() < 1 || a.rows() < a.cols()) {
    throw DimensionMismatch("qr_thin: need d >= k >= 1, got " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  const Householder h = householder(a);
  QrResult out{explicit_q(h, a.rows()), h.r};

  for (Index i = 0; i < out.r.rows(); ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }

  // R carries the singular values of A.
  const Vec sv = Eigen::JacobiSVD<Mat>(out.r).singularValues();
  const double s1 = sv(0);
  const double sk = sv(sv.size() - 1);
  if (!(s1 > 0.0) || sk < kRankTolerance * s1) {
    throw DegenerateFactorError("qr_thin: rank-deficient factor, sigma_k/sigma_1 = " +
                                std::to_string(s1 > 0.0 ? sk / s1 : 0.0));
  }
  return out;
}

Mat orthonormalize(const Mat& a) { return explicit_q(householder(a), a.rows()); }

void fix_column_signs(Mat& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0.0) m.col(j) *= -1.0;
  }
}

TruncatedSvd truncated_svd(const Mat& m, Index k, const TruncatedSvdOptions& options) {
  require_finite(m, "truncated_svd");
  if (k < 1 || k > std::min(m.rows(), m.cols())) {
    throw DimensionMismatch("truncated_svd: need 1 <= k <= min(rows, cols), got k=" +
                            std::to_string(k));
  }
  const Index block = std::min<Index>(std::min(m.rows(), m.cols()), k + options.oversampling);

  Rng rng(options.seed);
  Mat q = orthonormalize(m * gaussian_matrix(rng, m.cols(), block));

  TruncatedSvd out;
  double residual = 0.0;
  Vec sigma;
  for (int it = 0;; ++it) {
    // Rayleigh-Ritz on the current basis.
    const Mat b = q.transpose() * m;
    Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma = svd.singularValues();
    const double s1 = sigma(0);
    if (!(s1 > 0.0)) throw DegenerateSpectrumError("truncated_svd: zero matrix has no top-k subspace");

    out.u = q * svd.matrixU().leftCols(k);
    const Mat right = svd.matrixV().leftCols(k);
    residual = spectral_norm(m * right - out.u * sigma.head(k).asDiagonal()) / s1;

    const bool has_next = sigma.size() > k;
    const double gap = has_next ? (sigma(k - 1) - sigma(k)) / s1 : 1.0;
    if (residual < options.residual_tolerance) {
      if (gap < options.gap_tolerance) {
        throw DegenerateSpectrumError("truncated_svd: sigma_k - sigma_{k+1} below gap tolerance");
      }
      out.iterations = it;
      break;
    }
    if (it >= options.max_iterations) {
      if (gap < options.gap_tolerance) {
        throw DegenerateSpectrumError("truncated_svd: sigma_k - sigma_{k+1} below gap tolerance");
      }
      throw ConvergenceError("truncated_svd: subspace iteration did not converge", residual);
    }
    q = orthonormalize(m * orthonormalize(m.transpose() * q));
  }
  out.sigma = sigma.head(k);
  out.residual = residual;
  fix_column_signs(out.u);
  return out;
}

Mat top_k_singvecs(const Mat& m, Index k, const TruncatedSvdOptions& options) {
  return truncated_svd(m, k, options).u;
}

double spectral_norm(const Mat& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  const Mat gram = m.rows() <= m.cols() ? Mat(m * m.transpose()) : Mat(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

double sin_canonical_angle(const Mat& u, const Mat& w) {
  if (u.rows() != w.rows() || u.cols() != w.cols() || u.cols() < 1) {
    throw DimensionMismatch("sin_canonical_angle: bases must share shape d x k");
  }
  require_finite(u, "sin_canonical_angle");
  require_finite(w, "sin_canonical_angle");
  const Mat eye = Mat::Identity(u.cols(), u.cols());
  if ((u.transpose() * u - eye).norm() > 1e-8 || (w.transpose() * w - eye).norm() > 1e-8) {
    throw ValidationError("sin_canonical_angle: inputs must have orthonormal columns");
  }
  const Mat residual = w - u * (u.transpose() * w);
  return std::clamp(spectral_norm(residual), 0.0, 1.0);
}

Mat offdiag(const Mat& m) {
  Mat out = m;
  out.diagonal().setZero();
  return out;
}

Mat symmetric_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace mfm::linalg
