#pragma once

#include <cstdint>
#include <optional>

#include "hconv/common.hpp"
#include "hconv/norm_space.hpp"

namespace hconv {

/// Exact modulus of convexity 1 - [1 - (eps/2)^p]^(1/p), valid for p >= 2
/// (p = 2 reduces to the Hilbert formula 1 - sqrt(1 - eps^2/4)).
/// Throws UnsupportedExponent for 1 < p < 2 and p = infinity, DomainError for
/// eps outside [0, 2].
double ModulusClosedForm(const NormSpace& space, double eps);

/// Lower bound ((p-1)/8) eps^2 of the modulus for 1 < p < 2.
double ModulusLowerBound(const NormSpace& space, double eps);

/// Numerical modulus on the (e1, e2) coordinate section: the infimum of
/// 1 - |(x1+x2)/2| over unit vectors with |x1 - x2| = eps, taken over
/// `resolution` angles of x1 plus golden-section refinement at the best one.
/// Because it is a minimum over a subset of admissible pairs it bounds the
/// true modulus from above.
double ModulusBruteForce2d(const NormSpace& space, double eps,
                           int resolution = 720);

/// c with delta(eps) >= c eps^2 on [0, 2], or nullopt when no c > 0 exists.
struct PowerTypeConstant {
  std::optional<double> c;

  bool holds() const { return c.has_value(); }
  double value() const {
    if (!c) throw ConditionFails("modulus is not of power type 2");
    return *c;
  }
};

/// p = 2 gives 1/8; 1 < p < 2 gives (p-1)/8; p > 2 and p = infinity fail,
/// since there delta(eps) ~ (1/p)(eps/2)^p = o(eps^2).
PowerTypeConstant PowerType2Constant(const NormSpace& space);

/// Samples B((x1+x2)/2, c |x1-x2|^2 / r), 70% of the draws on its sphere and
/// the rest inside, and reports the first draw falling outside B(x0, r).
/// Throws PreconditionViolated when x1 or x2 is not in B(x0, r).
CheckResult BallInclusionCheck(const NormSpace& space, const VectorXd& x0,
                               const VectorXd& x1, const VectorXd& x2,
                               double r, double c, int samples,
                               std::uint64_t seed);

/// Radius c |x1-x2|^2 / r of the small ball used by BallInclusionCheck.
double InclusionRadius(const NormSpace& space, const VectorXd& x1,
                       const VectorXd& x2, double r, double c);

}  // namespace hconv
