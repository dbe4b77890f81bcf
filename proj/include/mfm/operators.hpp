#pragma once

// Measurement operators of the second-order model y = X^T w + A(M):
//   A(M)_i   = x_i^T M x_i
//   A'(z)    = sum_i z_i x_i x_i^T
//   P0(z)    = mean(z)
//   P1(z)    = X z / n
//   P2(z)    = (X o X) z / n - P0(z) 1
// and the moment-eliminating maps applied to the residual r = yhat - y.

#include "mfm/moments.hpp"
#include "mfm/types.hpp"

namespace mfm {

// AsPrinted omits the -P0(r)/2 I term; its expectation is then biased by
// tr(M_delta)/2 I.
enum class TraceCorrection { Corrected, AsPrinted };

Vec apply_a(const Mat& x, const Mat& m);
Mat apply_a_adjoint(const Mat& x, const Vec& z);

double p0(const Vec& z);
Vec p1(const Mat& x, const Vec& z);
Vec p2(const Mat& x, const Vec& z);

// Generalized-FM elimination map; requires profile.coefficients.
Mat m_operator(const Mat& x, const Vec& residual, const MomentProfile& profile,
               TraceCorrection correction = TraceCorrection::Corrected);
Vec w_operator(const Mat& x, const Vec& residual, const MomentProfile& profile);

// Improved-FM maps. No moment information is involved.
Mat m_operator_ifm(const Mat& x, const Vec& residual);
Vec w_operator_ifm(const Mat& x, const Vec& residual);

// m_operator(...) * factor without forming the d x d matrix, O(n d k).
Mat m_operator_apply(const Mat& x, const Vec& residual, const MomentProfile& profile,
                     const Mat& factor, TraceCorrection correction = TraceCorrection::Corrected);
Mat m_operator_ifm_apply(const Mat& x, const Vec& residual, const Mat& factor);

// A(L R^T), optionally with the diagonal of L R^T removed, in O(n d k).
Vec apply_a_factored(const Mat& x, const Mat& left, const Mat& right, bool zero_diagonal);

}  // namespace mfm
