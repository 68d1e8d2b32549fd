#include "hconv/banach_geometry.hpp"

#include <cmath>

namespace hconv {

namespace {

void CheckEps(double eps) {
  if (!(eps >= 0.0 && eps <= 2.0)) {
    throw DomainError("modulus of convexity: eps must lie in [0, 2]");
  }
}

// Unit vector of the 2D section at angle theta.
Eigen::Vector2d SectionPoint(double p, double theta) {
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  return u / NormSpace::PNorm(u, p);
}

// Midpoint defect 1 - |(x1+x2)/2| for x1 at angle theta and x2 the first
// point counter-clockwise from x1 at distance eps.
double SectionDefect(double p, double theta, double eps) {
  const Eigen::Vector2d x1 = SectionPoint(p, theta);
  auto dist = [&](double phi) {
    return NormSpace::PNorm(x1 - SectionPoint(p, phi), p);
  };
  // Bracket the first crossing on a coarse scan of the half-turn.
  constexpr int kScan = 64;
  double lo = theta;
  double hi = theta + M_PI;
  for (int k = 1; k <= kScan; ++k) {
    const double phi = theta + M_PI * k / kScan;
    if (dist(phi) >= eps) {
      hi = phi;
      break;
    }
    lo = phi;
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dist(mid) < eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Eigen::Vector2d x2 = SectionPoint(p, 0.5 * (lo + hi));
  return 1.0 - NormSpace::PNorm(0.5 * (x1 + x2), p);
}

}  // namespace

double ModulusClosedForm(const NormSpace& space, double eps) {
  CheckEps(eps);
  if (space.is_infinity() || space.p() < 2.0) {
    throw UnsupportedExponent(
        "closed-form modulus is available only for 2 <= p < infinity");
  }
  const double p = space.p();
  if (p == 2.0) return 1.0 - std::sqrt(1.0 - 0.25 * eps * eps);
  return 1.0 - std::pow(1.0 - std::pow(0.5 * eps, p), 1.0 / p);
}

double ModulusLowerBound(const NormSpace& space, double eps) {
  if (space.is_infinity() || !(space.p() > 1.0 && space.p() < 2.0)) {
    throw UnsupportedExponent("modulus lower bound requires 1 < p < 2");
  }
  if (!(eps > 0.0 && eps <= 2.0)) {
    throw DomainError("modulus lower bound: eps must lie in (0, 2]");
  }
  return (space.p() - 1.0) / 8.0 * eps * eps;
}

double ModulusBruteForce2d(const NormSpace& space, double eps,
                           int resolution) {
  CheckEps(eps);
  if (space.dim() < 2) {
    throw DomainError("modulus brute force needs a space of dimension >= 2");
  }
  if (eps == 0.0) return 0.0;
  // Only antipodal pairs are 2 apart; the distance is too flat near the
  // antipode for bisection to resolve it.
  if (eps == 2.0) return 1.0;
  const double p = space.p();
  const double step = 2.0 * M_PI / resolution;
  double best = kInfinity;
  double best_theta = 0.0;
  for (int k = 0; k < resolution; ++k) {
    const double theta = k * step;
    const double d = SectionDefect(p, theta, eps);
    if (d < best) {
      best = d;
      best_theta = theta;
    }
  }
  // Golden-section refinement on the bracket around the best angle.
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best_theta - step;
  double b = best_theta + step;
  double c = b - golden * (b - a);
  double d = a + golden * (b - a);
  double fc = SectionDefect(p, c, eps);
  double fd = SectionDefect(p, d, eps);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - golden * (b - a);
      fc = SectionDefect(p, c, eps);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + golden * (b - a);
      fd = SectionDefect(p, d, eps);
    }
  }
  best = std::min({best, fc, fd});
  return std::max(best, 0.0);
}

PowerTypeConstant PowerType2Constant(const NormSpace& space) {
  if (space.is_infinity() || space.p() > 2.0) return {};
  if (space.p() == 2.0) return {0.125};
  return {(space.p() - 1.0) / 8.0};
}

double InclusionRadius(const NormSpace& space, const VectorXd& x1,
                       const VectorXd& x2, double r, double c) {
  const double d = space.norm(x1 - x2);
  return c * d * d / r;
}

CheckResult BallInclusionCheck(const NormSpace& space, const VectorXd& x0,
                               const VectorXd& x1, const VectorXd& x2,
                               double r, double c, int samples,
                               std::uint64_t seed) {
  if (x0.size() != space.dim() || x1.size() != space.dim() ||
      x2.size() != space.dim()) {
    throw DimensionMismatch("ball inclusion: vector dimension differs");
  }
  if (!(r > 0.0) || !(c > 0.0)) {
    throw DomainError("ball inclusion: r and c must be positive");
  }
  const Ball outer(x0, r, space);
  constexpr double kRelTol = 1e-12;
  if (!outer.Contains(x1, kRelTol) || !outer.Contains(x2, kRelTol)) {
    throw PreconditionViolated("ball inclusion: x1 and x2 must lie in B(x0,r)");
  }
  const Ball inner(0.5 * (x1 + x2), InclusionRadius(space, x1, x2, r, c),
                   space);
  CheckResult result;
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const VectorXd z = SampleBall(inner, rng, 0.7);
    const double slack = r - space.norm(z - x0);
    result.worst_slack = std::min(result.worst_slack, slack);
    ++result.samples;
    if (slack < -kRelTol * r) {
      result.passed = false;
      result.witness = z;
      result.detail = "sampled point of the small ball lies outside B(x0,r)";
      return result;
    }
  }
  return result;
}

}  // namespace hconv
