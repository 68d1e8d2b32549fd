#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hconv/common.hpp"
#include "hconv/norm_space.hpp"
#include "hconv/poly_map.hpp"
#include "hconv/smooth_maps.hpp"

namespace hconv {

/// Radius below which f(B(x0, eps)) is guaranteed convex, with the inputs
/// that produced it.
struct RadiusBound {
  double eps0 = 0.0;
  double r = 0.0;
  double c = 0.0;
  double mu = 0.0;
  double lip = 0.0;
  bool lip_exact = true;
  double delta_mu = 0.0;
  double zeta = 0.0;
  double theta = 0.0;
  RegularityCertificate regularity;
  std::string formula_used;
};

struct RadiusOptions {
  double r = 1.0;
  double theta = 0.9;
  int validation_samples = 1000;
  int lipschitz_samples = 2000;
  std::uint64_t seed = 42;
};

/// eps0 = theta * min{r, delta_mu, 4c / (mu (L + 1))}, where c is the
/// power-type constant of the space, mu the validated regularity constant
/// and L = lip(Df; B(x0, r)). The range carries the Euclidean norm.
/// Throws ConditionFails, NotSurjective or ValidationFailed.
RadiusBound EstimateRadius(const PolyMap& f, const VectorXd& x0,
                           const NormSpace& space,
                           const RadiusOptions& options = {});

/// A midpoint of two image points that is provably outside the image:
/// every x of the ball has |f(x) - ybar| >= gap_lower_bound.
struct NonconvexityWitness {
  VectorXd x1;
  VectorXd x2;
  VectorXd y1;
  VectorXd y2;
  VectorXd ybar;
  double gap_lower_bound = 0.0;
  // Lipschitz slack of one cell of the finest grid used.
  double cell_slack = 0.0;
  int resolution = 0;
};

/// Rigorous lower bound of min_{x in B(x0, eps)} |f(x) - target|_2 from a
/// cube grid over the bounding box of the ball. Each cell contributes
/// |f(centre) - target| - K h sqrt(n) / 2 with K a bound of |Df|_F on the
/// box; cells that could still hold the minimum are bisected down to
/// `resolution` cells per axis and then split 4 ways per axis once more.
struct GapBound {
  double lower_bound = 0.0;
  double grid_minimum = kInfinity;
  double cell_slack = 0.0;
  int resolution = 0;
};

GapBound ImageGapBound(const PolyMap& f, const Ball& ball,
                       const VectorXd& target, int resolution = 200);

enum class Verdict { kCertified, kRefuted, kInconclusive };

std::string ToString(Verdict v);

/// Outcome of midpoint certification. Only a refutation is a proof; a
/// certification means no violation was found among the sampled pairs.
struct ConvexityCertificate {
  double eps = 0.0;
  int pairs_tested = 0;
  int pairs_skipped = 0;
  double max_preimage_residual = 0.0;
  double max_norm_excess = 0.0;
  double tol_res = 1e-8;
  double tol_ball = 1e-6;
  // Pairs whose midpoint had no preimage in the ball but no witness could be
  // confirmed for.
  int unconfirmed_candidates = 0;
  std::vector<NonconvexityWitness> witnesses;

  Verdict verdict() const;

  /// Certificates over disjoint pair sets combine by taking maxima and the
  /// union of witnesses.
  ConvexityCertificate& Merge(const ConvexityCertificate& other);
};

/// One tested pair, for CSV export.
struct PairRecord {
  VectorXd x1;
  VectorXd x2;
  VectorXd ybar;
  double residual = 0.0;
  double norm_excess = 0.0;
};

struct CertifyOptions {
  int n_pairs = 2000;
  std::uint64_t seed = 42;
  double tol_res = 1e-8;
  double tol_ball = 1e-6;
  // At most this many candidate pairs are sent to grid confirmation.
  int max_confirmations = 32;
};

/// For sampled pairs x1, x2 of B(x0, eps) (boundary-biased) solves
/// f(x) = (f(x1) + f(x2)) / 2 by Gauss-Newton from (x1 + x2) / 2, with
/// 8 restarts on failure, and accepts the pair when the residual is at most
/// tol_res and |x - x0| <= eps (1 + tol_ball). Rejected pairs become
/// witnesses once ImageGapBound confirms a positive gap (n_in <= 3).
ConvexityCertificate CertifyConvexity(const PolyMap& f, const VectorXd& x0,
                                      const NormSpace& space, double eps,
                                      const CertifyOptions& options = {},
                                      std::vector<PairRecord>* records = nullptr);

/// Searches structured pairs (coordinate and sign-pattern directions) and
/// `budget` random boundary pairs for a midpoint far from the image and
/// confirms the best ones on the grid. A witness is returned when the gap
/// bound exceeds 10 times the per-cell slack. Throws DimensionTooLarge for
/// n_in > 3.
std::optional<NonconvexityWitness> FindNonconvexityWitness(
    const PolyMap& f, const VectorXd& x0, const NormSpace& space, double eps,
    int budget, std::uint64_t seed);

/// Checks that points strictly inside the ball map to interior points of
/// the image: for sampled x with |x - x0| <= eps (1 - 1e-3), every target
/// f(x) + delta u over 20 directions u has a preimage in the ball. delta is
/// 1e-4, reduced near the boundary so that mu delta stays inside it.
/// Throws NotSurjective.
CheckResult BoundaryPreimageCheck(const PolyMap& f, const VectorXd& x0,
                                  const NormSpace& space, double eps,
                                  int samples, std::uint64_t seed);

}  // namespace hconv
