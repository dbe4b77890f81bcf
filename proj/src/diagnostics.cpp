#include "mfm/diagnostics.hpp"

#include "mfm/errors.hpp"
#include "mfm/linalg.hpp"
#include "mfm/moments.hpp"
#include "mfm/parallel.hpp"
#include "mfm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace mfm::diagnostics {
namespace {

// Seeds of trial t at sample-size index i. Distinct sample sizes never share
// a stream, so adding a size leaves the others unchanged.
Rng trial_rng(std::uint64_t seed, std::size_t size_index, std::size_t trial) {
  return make_rng(derive_seed(seed, 0x5eed0000ULL + size_index), trial);
}

void check_sizes(std::span<const Index> n_list, int trials) {
  if (n_list.size() < 2) throw ValidationError("decay check: need at least two sample sizes");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) throw ValidationError("decay check: sample sizes must be >= 2");
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      throw ValidationError("decay check: sample sizes must be strictly increasing");
    }
  }
  if (trials < 1) throw ValidationError("decay check: trials must be >= 1");
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Runs `errors_of(rng, n)` (one value per report) for every (n, trial) and
// averages per report.
std::vector<DecayReport> run_decay(
    const std::vector<std::string>& names, std::span<const Index> n_list, int trials,
    std::uint64_t seed, const std::function<std::vector<double>(Rng&, Index)>& errors_of) {
  check_sizes(n_list, trials);
  const std::size_t sizes = n_list.size();
  const std::size_t per = static_cast<std::size_t>(trials);
  std::vector<std::vector<double>> slots(sizes * per);
  parallel_for(sizes * per, [&](std::size_t job) {
    const std::size_t i = job / per;
    Rng rng = trial_rng(seed, i, job % per);
    slots[job] = errors_of(rng, n_list[i]);
  });

  std::vector<DecayReport> reports(names.size());
  for (std::size_t r = 0; r < names.size(); ++r) {
    DecayReport& rep = reports[r];
    rep.name = names[r];
    rep.trials = trials;
    rep.sample_sizes.assign(n_list.begin(), n_list.end());
    for (std::size_t i = 0; i < sizes; ++i) {
      double sum = 0.0;
      for (std::size_t t = 0; t < per; ++t) sum += slots[i * per + t].at(r);
      rep.mean_errors.push_back(sum / static_cast<double>(per));
    }
    rep.ratio_n_vs_4n = normalized_ratio(rep.sample_sizes, rep.mean_errors);
  }
  return reports;
}

}  // namespace

double normalized_ratio(std::span<const Index> sample_sizes, std::span<const double> errors) {
  if (sample_sizes.size() < 2 || errors.size() < 2) {
    throw ValidationError("normalized_ratio: need two sample sizes");
  }
  const double growth = static_cast<double>(sample_sizes[1]) / static_cast<double>(sample_sizes[0]);
  if (!(growth > 1.0)) throw ValidationError("normalized_ratio: sample sizes must increase");
  return std::pow(errors[0] / errors[1], std::log(4.0) / std::log(growth));
}

DecayReport rip_check(const Mat& m, FeatureDistribution dist, std::span<const Index> n_list,
                      int trials, std::uint64_t seed) {
  if (m.rows() != m.cols()) throw DimensionMismatch("rip_check: M must be square");
  const Index d = m.rows();
  const MomentProfile prof = analytic_profile(dist, d);
  const Vec diag = m.diagonal();
  Mat expected = 2.0 * m;
  expected.diagonal().array() += m.trace();
  expected.diagonal().array() += (prof.phi.array() - 3.0) * diag.array();

  auto reports = run_decay({"rip"}, n_list, trials, seed, [&](Rng& rng, Index n) {
    const Mat x = sample_features(rng, dist, d, n);
    const Mat est = apply_a_adjoint(x, apply_a(x, m)) / static_cast<double>(n);
    return std::vector<double>{linalg::spectral_norm(est - expected)};
  });
  return reports.front();
}

std::vector<DecayReport> p_concentration_check(const GroundTruth& truth, FeatureDistribution dist,
                                               std::span<const Index> n_list, int trials,
                                               std::uint64_t seed) {
  const Index d = truth.dim();
  const MomentProfile prof = analytic_profile(dist, d);
  const Vec dm = truth.m_star.diagonal();
  const double e0 = truth.m_star.trace();
  const Vec e1 = (dm.array() * prof.kappa.array()).matrix() + truth.w_star;
  const Vec e2 = (dm.array() * (prof.phi.array() - 1.0) +
                  prof.kappa.array() * truth.w_star.array()).matrix();

  return run_decay({"p0", "p1", "p2"}, n_list, trials, seed, [&](Rng& rng, Index n) {
    const Mat x = sample_features(rng, dist, d, n);
    const Vec y = x.transpose() * truth.w_star + apply_a(x, truth.m_star);
    return std::vector<double>{std::abs(p0(y) - e0), (p1(x, y) - e1).norm(),
                               (p2(x, y) - e2).norm()};
  });
}

std::vector<DecayReport> moment_decay_check(FeatureDistribution dist, Index d,
                                            std::span<const Index> n_list, int trials,
                                            std::uint64_t seed) {
  const MomentProfile truth = analytic_profile(dist, d);
  return run_decay({"kappa", "phi"}, n_list, trials, seed, [&](Rng& rng, Index n) {
    const MomentProfile est = estimate_moments(sample_features(rng, dist, d, n));
    return std::vector<double>{max_abs(est.kappa - truth.kappa), max_abs(est.phi - truth.phi)};
  });
}

std::vector<DecayReport> coefficient_decay_check(FeatureDistribution dist, Index d,
                                                 std::span<const Index> n_list, int trials,
                                                 std::uint64_t seed, double tau_min) {
  const EliminationCoefficients exact =
      elimination_coefficients(analytic_profile(dist, d), tau_min);
  return run_decay({"G", "H"}, n_list, trials, seed, [&](Rng& rng, Index n) {
    const MomentProfile est = estimate_moments(sample_features(rng, dist, d, n));
    const EliminationCoefficients c = elimination_coefficients(est, tau_min);
    return std::vector<double>{max_abs(c.g - exact.g), max_abs(c.h - exact.h)};
  });
}

EliminationErrors elimination_check(const GroundTruth& truth, const Mat& m_delta,
                                    const Vec& w_delta, FeatureDistribution dist, Index n,
                                    int trials, EliminationMode mode, std::uint64_t seed) {
  const Index d = truth.dim();
  if (m_delta.rows() != d || m_delta.cols() != d || w_delta.size() != d) {
    throw DimensionMismatch("elimination_check: perturbation shape");
  }
  if (n < 1 || trials < 2) throw ValidationError("elimination_check: need n >= 1, trials >= 2");

  MomentProfile prof = analytic_profile(dist, d);
  if (mode != EliminationMode::Ifm) prof.coefficients = elimination_coefficients(prof);
  const TraceCorrection correction = mode == EliminationMode::GfmAsPrinted
                                         ? TraceCorrection::AsPrinted
                                         : TraceCorrection::Corrected;
  // The diagonal-free map only targets the off-diagonal part.
  const Mat target = mode == EliminationMode::Ifm ? linalg::offdiag(m_delta) : m_delta;
  const Mat m_model = truth.m_star + m_delta;
  const Vec w_model = truth.w_star + w_delta;

  const std::size_t count = static_cast<std::size_t>(trials);
  std::vector<Mat> mats(count);
  std::vector<Vec> vecs(count);
  parallel_for(count, [&](std::size_t t) {
    Rng rng = trial_rng(seed, 0, t);
    const Mat x = sample_features(rng, dist, d, n);
    const Vec y = x.transpose() * truth.w_star + apply_a(x, truth.m_star);
    const Vec r = x.transpose() * w_model + apply_a(x, m_model) - y;
    if (mode == EliminationMode::Ifm) {
      mats[t] = m_operator_ifm(x, r);
      vecs[t] = w_operator_ifm(x, r);
    } else {
      mats[t] = m_operator(x, r, prof, correction);
      vecs[t] = w_operator(x, r, prof);
    }
  });

  Mat mean_m = Mat::Zero(d, d);
  Vec mean_w = Vec::Zero(d);
  for (std::size_t t = 0; t < count; ++t) {
    mean_m += mats[t];
    mean_w += vecs[t];
  }
  mean_m /= static_cast<double>(trials);
  mean_w /= static_cast<double>(trials);

  // Spectral size of one trial's fluctuation, scaled to the mean of `trials`.
  double sq_m = 0.0;
  double sq_w = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    sq_m += std::pow(linalg::spectral_norm(mats[t] - mean_m), 2);
    sq_w += (vecs[t] - mean_w).squaredNorm();
  }
  const double denom = static_cast<double>(trials - 1) * static_cast<double>(trials);

  EliminationErrors out;
  out.matrix_error = linalg::spectral_norm(mean_m - target);
  out.vector_error = (mean_w - w_delta).norm();
  out.matrix_noise = std::sqrt(sq_m / denom);
  out.vector_noise = std::sqrt(sq_w / denom);
  return out;
}

Mat perturbation_with_trace(Index d, Index k, double trace, std::uint64_t seed) {
  if (k < 1 || k > d) throw ValidationError("perturbation_with_trace: need 1 <= k <= d");
  Vec eig = Vec::Ones(k);
  if (k == 1) {
    if (std::abs(trace - 1.0) > 1e-12) {
      throw ValidationError("perturbation_with_trace: rank one forces trace 1");
    }
  } else {
    const double t = (trace - 1.0) / static_cast<double>(k - 1);
    if (std::abs(t) > 1.0) {
      throw ValidationError("perturbation_with_trace: |trace| too large for unit spectral norm");
    }
    eig.tail(k - 1).setConstant(t);
  }
  Rng rng = make_rng(seed, 0);
  const Mat q = linalg::orthonormalize(gaussian_matrix(rng, d, k));
  return q * eig.asDiagonal() * q.transpose();
}

double degeneracy_gap(const Mat& x, const Mat& m, const Mat& diagonal) {
  if (m.rows() != x.rows() || diagonal.rows() != x.rows()) {
    throw DimensionMismatch("degeneracy_gap: shape");
  }
  return max_abs(apply_a(x, m + diagonal) - apply_a(x, m));
}

bool bernoulli_degeneracy_check(Index d, Index n, int trials, std::uint64_t seed) {
  if (d < 2 || n < 1 || trials < 1) throw ValidationError("bernoulli check: bad sizes");
  const std::size_t count = static_cast<std::size_t>(trials);
  std::vector<double> gaps(count);
  parallel_for(count, [&](std::size_t t) {
    Rng rng = trial_rng(seed, 0, t);
    const Mat m = gaussian_matrix(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d)));
    Vec g = gaussian_matrix(rng, d, 1).col(0);
    g.array() -= g.mean();
    const Mat x = sample_features(rng, FeatureDistribution::Rademacher, d, n);
    gaps[t] = degeneracy_gap(x, m, g.asDiagonal().toDenseMatrix());
  });
  return std::all_of(gaps.begin(), gaps.end(), [](double g) { return g <= 1e-12; });
}

ConvergenceFit convergence_fit(std::span<const TraceRecord> trace, double floor) {
  std::vector<double> ts;
  std::vector<double> logs;
  std::optional<double> eps0;
  for (const TraceRecord& rec : trace) {
    if (!rec.recovery_error) continue;
    const double e = *rec.recovery_error;
    if (!eps0) eps0 = e;
    if (!(e > 0.0) || !std::isfinite(e) || e < floor * *eps0) break;
    ts.push_back(rec.iteration);
    logs.push_back(std::log(e));
  }
  if (ts.size() < 5) {
    throw InsufficientDataError("convergence_fit: need at least 5 records above the floor, got " +
                                std::to_string(ts.size()));
  }
  const double m = static_cast<double>(ts.size());
  const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / m;
  const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / m;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (logs[i] - ml);
    sll += (logs[i] - ml) * (logs[i] - ml);
  }
  const double slope = stl / stt;
  ConvergenceFit fit;
  fit.points = static_cast<int>(ts.size());
  fit.rate = std::exp(slope);
  // Relative tolerance: a flat trace leaves only rounding in sll.
  if (sll > 1e-24 * std::max(1.0, ml * ml) * m) {
    double sse = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double resid = logs[i] - (ml + slope * (ts[i] - mt));
      sse += resid * resid;
    }
    fit.r_squared = 1.0 - sse / sll;
  }
  return fit;
}

}  // namespace mfm::diagnostics
