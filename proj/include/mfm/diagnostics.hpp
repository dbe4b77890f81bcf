#pragma once

// Monte-Carlo checks of the concentration, elimination and degeneracy
// properties the solver relies on. All checks use analytic moments.

#include "mfm/model.hpp"
#include "mfm/operators.hpp"
#include "mfm/solver.hpp"
#include "mfm/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfm::diagnostics {

struct RatioBand {
  double lo = 1.3;
  double hi = 3.1;
  bool contains(double ratio) const { return ratio >= lo && ratio <= hi; }
};

struct DecayReport {
  std::string name;
  std::vector<Index> sample_sizes;
  std::vector<double> mean_errors;
  // Error ratio normalised to a 4x increase in n; 2 under a 1/sqrt(n) law.
  double ratio_n_vs_4n = 0.0;
  int trials = 0;
  double confidence_eta = 0.05;
};

// (e_0 / e_1)^(log 4 / log(n_1 / n_0)) from the first two sample sizes.
double normalized_ratio(std::span<const Index> sample_sizes, std::span<const double> errors);

// Mean of || (1/n) A'A(M) - (2M + tr(M) I + D(phi-3) D(M)) ||_2 per n.
DecayReport rip_check(const Mat& m, FeatureDistribution dist, std::span<const Index> n_list,
                      int trials, std::uint64_t seed);

// P0/P1/P2 of planted labels against their closed-form expectations.
std::vector<DecayReport> p_concentration_check(const GroundTruth& truth, FeatureDistribution dist,
                                               std::span<const Index> n_list, int trials,
                                               std::uint64_t seed);

// ||kappa_hat - kappa*||_inf and ||phi_hat - phi*||_inf.
std::vector<DecayReport> moment_decay_check(FeatureDistribution dist, Index d,
                                            std::span<const Index> n_list, int trials,
                                            std::uint64_t seed);

// ||G_hat - G*||_inf and ||H_hat - H*||_inf.
std::vector<DecayReport> coefficient_decay_check(FeatureDistribution dist, Index d,
                                                 std::span<const Index> n_list, int trials,
                                                 std::uint64_t seed,
                                                 double tau_min = kDefaultTauMin);

enum class EliminationMode { GfmCorrected, GfmAsPrinted, Ifm };

struct EliminationErrors {
  double matrix_error = 0.0;  // || mean M(r) - M_delta ||_2
  double vector_error = 0.0;  // || mean W(r) - w_delta ||_2
  // Standard errors of the two Monte-Carlo means.
  double matrix_noise = 0.0;
  double vector_noise = 0.0;
};

// Current model = truth + (w_delta, m_delta); residuals come from fresh
// batches. Gfm modes need a distribution passing the MIP gate.
EliminationErrors elimination_check(const GroundTruth& truth, const Mat& m_delta,
                                    const Vec& w_delta, FeatureDistribution dist, Index n,
                                    int trials, EliminationMode mode, std::uint64_t seed);

// Symmetric rank-k perturbation with ||.||_2 = 1 and the requested trace:
// eigenvalues (1, t, ..., t), t = (trace - 1) / (k - 1).
Mat perturbation_with_trace(Index d, Index k, double trace, std::uint64_t seed);

// max_i |A(M + D)_i - A(M)_i|.
double degeneracy_gap(const Mat& x, const Mat& m, const Mat& diagonal);

// True iff random traceless diagonal perturbations leave A unchanged to
// 1e-12 on +-1 data in every trial.
bool bernoulli_degeneracy_check(Index d, Index n, int trials, std::uint64_t seed);

struct ConvergenceFit {
  double rate = 1.0;
  std::optional<double> r_squared;
  int points = 0;
  bool contracting() const { return rate < 1.0 && r_squared.has_value(); }
};

// Least-squares fit of log eps_t against t over the prefix with
// eps_t >= floor * eps_0. Throws InsufficientDataError below 5 points.
ConvergenceFit convergence_fit(std::span<const TraceRecord> trace, double floor = 1e-9);

}  // namespace mfm::diagnostics
