#pragma once

#include "mfm/types.hpp"

#include <optional>

namespace mfm {

// Learned parameters. For GFM/IFM `u_bar` is orthonormal and M = u_bar v^T
// (diagonal removed for IFM). For FMBaseline `u_bar` holds the raw factor U,
// `v` is empty and M = offdiag(U U^T).
struct ModelState {
  Vec w;
  Mat u_bar;
  Mat v;
  Variant variant = Variant::IFM;
  int iteration = 0;

  Index dim() const { return w.size(); }
  Index rank() const { return u_bar.cols(); }
  Mat effective_m() const;
};

// Planted model. `m_star = left * right^T`, minus its diagonal when
// `zero_diagonal` is set. `factor_basis` is an orthonormal basis of the
// column space measurements can identify (used for canonical angles).
struct GroundTruth {
  Vec w_star;
  Mat m_star;
  Vec singular_values;
  Mat factor_basis;
  Mat left;
  Mat right;
  bool zero_diagonal = false;

  Index dim() const { return w_star.size(); }
  Index identifiable_rank() const { return factor_basis.cols(); }
};

// X^T w + A(M_effective).
Vec predict(const ModelState& state, const Mat& x);

// ||w - w*||_2 + ||sym(M_eff) - sym(M*)||_2. Only the symmetric part of M is
// observable through x^T M x.
double recovery_error(const ModelState& state, const GroundTruth& truth);

double rmse(const Vec& predicted, const Vec& labels);

// A state whose predictions reproduce the planted labels exactly.
ModelState truth_as_state(const GroundTruth& truth);

}  // namespace mfm
