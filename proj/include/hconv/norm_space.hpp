#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hconv/common.hpp"
#include "hconv/random.hpp"

namespace hconv {

/// A finite-dimensional real space carrying the p-norm, 1 < p <= infinity.
/// p = infinity is admitted so that non-rotund counterexamples can be built,
/// but every operation that needs condition delta(eps) >= c eps^2 rejects it.
class NormSpace {
 public:
  NormSpace(int dim, double p) : dim_(dim), p_(p) {
    if (dim < 1) throw DomainError("NormSpace: dimension must be positive");
    if (!(p > 1.0)) throw UnsupportedExponent("NormSpace: p must exceed 1");
  }

  static NormSpace Euclidean(int dim) { return NormSpace(dim, 2.0); }

  int dim() const { return dim_; }
  double p() const { return p_; }
  bool is_infinity() const { return std::isinf(p_); }
  bool is_euclidean() const { return p_ == 2.0; }

  /// Conjugate exponent q with 1/p + 1/q = 1.
  double dual_exponent() const {
    if (is_infinity()) return 1.0;
    return p_ / (p_ - 1.0);
  }

  /// Factor k with k^-1 |x|_2 <= |x|_p <= k |x|_2 for all x in this space.
  double equivalence_factor() const {
    const double gap = is_infinity() ? 0.5 : std::abs(0.5 - 1.0 / p_);
    return std::pow(static_cast<double>(dim_), gap);
  }

  template <typename Derived>
  typename Derived::Scalar norm(const Eigen::MatrixBase<Derived>& x) const {
    return PNorm(x, p_);
  }

  /// Norm of the dual space, used for multipliers paired with vectors here.
  template <typename Derived>
  typename Derived::Scalar dual_norm(const Eigen::MatrixBase<Derived>& x) const {
    return PNorm(x, dual_exponent());
  }

  template <typename Derived>
  static typename Derived::Scalar PNorm(const Eigen::MatrixBase<Derived>& x,
                                        double p) {
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0) return Scalar(0);
    if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
    if (p == 2.0) return x.norm();
    if (p == 1.0) return x.cwiseAbs().sum();
    // Scale by the largest entry so that |x_i|^p neither overflows nor
    // underflows for large p.
    const Scalar scale = x.cwiseAbs().maxCoeff();
    if (scale == Scalar(0)) return Scalar(0);
    Scalar acc(0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      acc += std::pow(std::abs(x[i]) / scale, p);
    }
    return scale * std::pow(acc, 1.0 / p);
  }

  std::string ToString() const;

  bool operator==(const NormSpace& other) const {
    return dim_ == other.dim_ && p_ == other.p_;
  }

 private:
  int dim_;
  double p_;
};

/// Closed ball B(center, radius) of a NormSpace.
struct Ball {
  VectorXd center;
  double radius;
  NormSpace space;

  Ball(VectorXd c, double r, NormSpace s)
      : center(std::move(c)), radius(r), space(s) {
    if (!(radius >= 0.0)) throw DomainError("Ball: radius must be nonnegative");
    if (center.size() != space.dim()) {
      throw DimensionMismatch("Ball: center dimension differs from space");
    }
  }

  bool Contains(const VectorXd& x, double rel_tol = 0.0) const {
    return space.norm(x - center) <= radius * (1.0 + rel_tol);
  }
};

/// Point of the unit sphere obtained by radially normalising a Gaussian draw.
VectorXd SampleUnitSphere(const NormSpace& space, Rng& rng);

/// Sample of the ball: with probability `surface_fraction` on its sphere,
/// otherwise in its interior with radius distributed as U^(1/dim).
VectorXd SampleBall(const Ball& ball, Rng& rng, double surface_fraction);

/// Euclidean-nearest point of the ball.
VectorXd ProjectOntoBall(const Ball& ball, const VectorXd& v);

/// Gradient of the norm at u != 0 (the outward normal of the sphere through
/// u). Returns zero at u = 0.
VectorXd NormGradient(const NormSpace& space, const VectorXd& u);

/// |M|_{in -> out}. Exact (SVD) when both spaces are Euclidean; otherwise a
/// deterministic lower estimate from coordinate vectors, sign patterns,
/// 2000 random directions and local refinement of the best direction.
double OperatorNorm(const MatrixXd& m, const NormSpace& in,
                    const NormSpace& out);

}  // namespace hconv
