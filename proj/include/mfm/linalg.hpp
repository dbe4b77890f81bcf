#pragma once

// Dense small-matrix kernels used by the alternating solver: thin QR,
// truncated SVD by randomized subspace iteration, spectral norm and the
// largest canonical angle between two subspaces.

#include "mfm/types.hpp"

#include <cstdint>

namespace mfm::linalg {

// Factors with sigma_k < kRankTolerance * sigma_1 are treated as degenerate.
inline constexpr double kRankTolerance = 1e-12;

struct QrResult {
  Mat q;  // d x k, orthonormal columns
  Mat r;  // k x k, upper triangular, nonnegative diagonal
};

// Thin Householder QR of a full-column-rank d x k matrix (d >= k).
// Throws DegenerateFactorError when the matrix is numerically rank deficient.
QrResult qr_thin(const Mat& a);

// Orthonormal basis for the range of `a` (Householder Q, no rank check).
Mat orthonormalize(const Mat& a);

struct TruncatedSvdOptions {
  int oversampling = 5;
  int max_iterations = 500;
  double residual_tolerance = 1e-9;  // relative to sigma_1
  double gap_tolerance = 1e-10;      // relative to sigma_1
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct TruncatedSvd {
  Mat u;       // d x k left singular vectors
  Vec sigma;   // k leading singular values
  int iterations = 0;
  double residual = 0.0;
};

// Top-k left singular vectors of `m`, each column signed so that its
// largest-magnitude entry is positive.
Mat top_k_singvecs(const Mat& m, Index k, const TruncatedSvdOptions& options = {});
TruncatedSvd truncated_svd(const Mat& m, Index k, const TruncatedSvdOptions& options = {});

// Largest singular value.
double spectral_norm(const Mat& m);

// sin of the largest canonical angle between span(u) and span(w). Both
// arguments must be d x k with orthonormal columns (within 1e-8).
double sin_canonical_angle(const Mat& u, const Mat& w);

void fix_column_signs(Mat& m);

Mat offdiag(const Mat& m);
Mat symmetric_part(const Mat& m);
bool all_finite(const Mat& m);

}  // namespace mfm::linalg
