#pragma once

#include <cstdint>
#include <string>

#include "hconv/common.hpp"
#include "hconv/norm_space.hpp"
#include "hconv/poly_map.hpp"

namespace hconv {

/// o(xbar; h) = f(xbar + h) - f(xbar) - Df(xbar)[h].
VectorXd Remainder(const PolyMap& f, const VectorXd& xbar, const VectorXd& h);

/// |(f(x1) + f(x2))/2 - f((x1 + x2)/2)| in the range norm. Bounded by
/// (1/8) lip(Df) |x1 - x2|^2, a bound attained by f(x) = x^2.
double MidpointDefect(const PolyMap& f, const VectorXd& x1, const VectorXd& x2,
                      const NormSpace& range);
double MidpointDefect(const PolyMap& f, const VectorXd& x1,
                      const VectorXd& x2);

/// Coefficient of |x1 - x2|^2 lip(Df) in the midpoint-defect bound.
inline constexpr double kMidpointDefectCoefficient = 1.0 / 8.0;

struct LipschitzEstimate {
  enum class Kind { kExact, kSampledLowerBound };

  double value = 0.0;
  Kind kind = Kind::kExact;
  VectorXd region_center;
  double region_radius = 0.0;
  std::string method;

  bool exact() const { return kind == Kind::kExact; }
};

/// lip(Df; region) with respect to the given domain and range norms.
/// For degree <= 2 maps Df(x) - Df(x') = D^2 f[x - x'] with a constant
/// tensor, so the value is sup_{|h|=1} |D^2 f[h]|_op, found by direction
/// sampling with refinement and reported as exact. Higher degrees give a
/// sampled lower bound of |Df(x) - Df(x')|_op / |x - x'| over pairs in the
/// region.
LipschitzEstimate LipschitzOfDerivative(const PolyMap& f, const Ball& region,
                                        const NormSpace& range, int samples,
                                        std::uint64_t seed);

struct SurjectivityResult {
  bool onto = false;
  int rank = 0;
  VectorXd singular_values;
};

inline constexpr double kRankTolerance = 1e-10;

/// Row rank of Df(x0), counting singular values above 1e-10.
SurjectivityResult SurjectivityCheck(const PolyMap& f, const VectorXd& x0);

/// Estimated metric-regularity data around (x0, f(x0)):
/// dist(x, f^-1(y)) <= mu |y - f(x)| for x in B(x0, delta_mu),
/// y in B(f(x0), zeta).
struct RegularityCertificate {
  double mu = 0.0;
  double sigma_min = 0.0;
  double delta_mu = 0.0;
  double zeta = 0.0;
  bool validated = false;
  double worst_ratio = 0.0;
  int samples = 0;
  int shrinks = 0;
  VectorXd worst_x;
  VectorXd worst_y;
  std::string method;
};

/// Safety factor applied to 1/sigma_min to absorb curvature.
inline constexpr double kRegularitySafetyFactor = 2.0;

/// mu = 2 / sigma_min(Df(x0)), times the p-norm equivalence factors of the
/// domain and range when they are not Euclidean. Throws NotSurjective.
RegularityCertificate MetricRegConstant(const PolyMap& f, const VectorXd& x0,
                                        const NormSpace& domain,
                                        const NormSpace& range);

/// Samples x in B(x0, delta_mu), y in B(f(x0), zeta), bounds
/// dist(x, f^-1(y)) from above by multi-start Gauss-Newton and requires the
/// ratio against |y - f(x)| to stay below mu. On failure (a ratio above mu
/// or a target without a found preimage) both radii are halved, at most six
/// times. The returned certificate has validated == false when every
/// attempt failed.
RegularityCertificate ValidateMetricRegularity(
    const PolyMap& f, const VectorXd& x0, const RegularityCertificate& cert,
    double delta_mu, double zeta, int samples, std::uint64_t seed,
    const NormSpace& domain, const NormSpace& range);

/// One sampling pass at fixed radii without shrinking; the returned
/// certificate carries the observed worst ratio.
RegularityCertificate MeasureRegularityRatio(
    const PolyMap& f, const VectorXd& x0, const RegularityCertificate& cert,
    double delta_mu, double zeta, int samples, std::uint64_t seed,
    const NormSpace& domain, const NormSpace& range);

/// Linear openness with rate sigma = 1/mu: targets on the sphere of
/// B(f(x), sigma r (1 - 1e-3)) must have preimages in B(x, r).
CheckResult LinearOpennessCheck(const PolyMap& f, const VectorXd& x0,
                                const RegularityCertificate& cert, int samples,
                                std::uint64_t seed, const NormSpace& domain,
                                const NormSpace& range);

}  // namespace hconv
