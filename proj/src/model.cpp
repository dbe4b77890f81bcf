#include "mfm/model.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"
#include "mfm/operators.hpp"

#include <cmath>
#include <string>

namespace mfm {

Mat ModelState::effective_m() const {
  switch (variant) {
    case Variant::GFM: return u_bar * v.transpose();
    case Variant::IFM: return linalg::offdiag(u_bar * v.transpose());
    case Variant::FMBaseline: return linalg::offdiag(u_bar * u_bar.transpose());
  }
  return {};
}

Vec predict(const ModelState& state, const Mat& x) {
  if (x.rows() != state.dim()) {
    throw DimensionMismatch("predict: model has d=" + std::to_string(state.dim()) +
                            " but features have " + std::to_string(x.rows()) + " rows");
  }
  Vec out = x.transpose() * state.w;
  switch (state.variant) {
    case Variant::GFM: out += apply_a_factored(x, state.u_bar, state.v, false); break;
    case Variant::IFM: out += apply_a_factored(x, state.u_bar, state.v, true); break;
    case Variant::FMBaseline: out += apply_a_factored(x, state.u_bar, state.u_bar, true); break;
  }
  return out;
}

double recovery_error(const ModelState& state, const GroundTruth& truth) {
  if (state.dim() != truth.dim()) throw DimensionMismatch("recovery_error: dimension mismatch");
  const Mat diff = linalg::symmetric_part(state.effective_m() - truth.m_star);
  return (state.w - truth.w_star).norm() + linalg::spectral_norm(diff);
}

double rmse(const Vec& predicted, const Vec& labels) {
  if (predicted.size() != labels.size() || labels.size() == 0) {
    throw DimensionMismatch("rmse: vectors must be non-empty and equal length");
  }
  return std::sqrt((predicted - labels).squaredNorm() / static_cast<double>(labels.size()));
}

ModelState truth_as_state(const GroundTruth& truth) {
  if (truth.left.size() == 0 || truth.left.cols() != truth.right.cols()) {
    throw PreconditionError("truth_as_state: ground truth carries no factors");
  }
  // Represent sym(left right^T) on the identifiable basis so that the state
  // is a fixed point of the symmetric updates.
  ModelState state;
  state.u_bar = truth.factor_basis;
  state.v = linalg::symmetric_part(truth.left * truth.right.transpose()) * state.u_bar;
  state.w = truth.w_star;
  state.variant = truth.zero_diagonal ? Variant::IFM : Variant::GFM;
  return state;
}

}  // namespace mfm
