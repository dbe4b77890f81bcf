#pragma once

#include "mfm/types.hpp"

#include <optional>
#include <vector>

namespace mfm {

inline constexpr double kDefaultTauMin = 1e-3;

enum class MomentSource { EstimatedFromBatch, Analytic };

// Per-coordinate 2-column coefficient tables: column 0 multiplies P1,
// column 1 multiplies P2.
struct EliminationCoefficients {
  Mat g;  // d x 2
  Mat h;  // d x 2
};

struct MomentProfile {
  Vec kappa;  // E x^3 per coordinate
  Vec phi;    // E x^4 per coordinate
  Vec tau;    // |phi - 1 - kappa^2|
  double p = 1.0;
  // Absent when some tau_j fell below tau_min at preparation time.
  std::optional<EliminationCoefficients> coefficients;
  MomentSource source = MomentSource::Analytic;

  Index dim() const { return kappa.size(); }
};

MomentProfile profile_from_moments(Vec kappa, Vec phi, MomentSource source);

// Sample third/fourth moments of the rows of a d x n feature matrix.
MomentProfile estimate_moments(const Mat& x);

MomentProfile analytic_profile(FeatureDistribution dist, Index d);

// True iff min_j tau_j >= tau_min.
bool mip_gate(const MomentProfile& profile, double tau_min);

// Solves the per-coordinate 2x2 systems
//   [1, k; k, phi-1] g = [k; phi-3],   [1, k; k, phi-1] h = [1; 0].
// Throws SingularMomentSystemError naming the first coordinate whose
// determinant is below tau_min in magnitude.
EliminationCoefficients elimination_coefficients(const MomentProfile& profile,
                                                 double tau_min = kDefaultTauMin);

// Returns `profile` with coefficients attached when the gate passes, and with
// coefficients cleared otherwise.
MomentProfile prepare_for_elimination(MomentProfile profile, double tau_min = kDefaultTauMin);

struct StandardizationReport {
  Vec mean;
  Vec variance;
  std::vector<Index> offending;  // |mean| > 0.1 or |var - 1| > 0.3

  bool ok() const { return offending.empty(); }
};

StandardizationReport check_standardized(const Mat& x);

struct Standardizer {
  Vec mean;
  Vec scale;

  void apply(Mat& x) const;
};

// Per-coordinate sample mean / standard deviation of the rows of `x`.
Standardizer fit_standardizer(const Mat& x);

}  // namespace mfm
