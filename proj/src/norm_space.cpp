#include "hconv/norm_space.hpp"

#include <sstream>

namespace hconv {

std::string NormSpace::ToString() const {
  std::ostringstream out;
  out << "R^" << dim_ << " with p=";
  if (is_infinity()) {
    out << "inf";
  } else {
    out << p_;
  }
  return out.str();
}

VectorXd SampleUnitSphere(const NormSpace& space, Rng& rng) {
  VectorXd v = rng.NormalVector(space.dim());
  double n = space.norm(v);
  while (n == 0.0) {
    v = rng.NormalVector(space.dim());
    n = space.norm(v);
  }
  return v / n;
}

VectorXd SampleBall(const Ball& ball, Rng& rng, double surface_fraction) {
  const bool on_surface = rng.Uniform() < surface_fraction;
  const VectorXd u = SampleUnitSphere(ball.space, rng);
  double t = 1.0;
  if (!on_surface) {
    t = std::pow(rng.Uniform(), 1.0 / ball.space.dim());
  }
  return ball.center + ball.radius * t * u;
}

namespace {

// Solves w + theta p w^(p-1) = a for w in [0, a].
double ShrinkCoordinate(double a, double theta, double p) {
  double lo = 0.0;
  double hi = a;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * (1.0 + a); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid + theta * p * std::pow(mid, p - 1.0) > a) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

VectorXd ProjectOntoBall(const Ball& ball, const VectorXd& v) {
  const VectorXd u = v - ball.center;
  const double norm = ball.space.norm(u);
  if (norm <= ball.radius) return v;
  if (ball.radius == 0.0) return ball.center;
  if (ball.space.is_euclidean()) {
    return ball.center + u * (ball.radius / norm);
  }
  if (ball.space.is_infinity()) {
    return ball.center + u.cwiseMax(-ball.radius).cwiseMin(ball.radius);
  }
  // KKT of min 1/2|z-u|^2 s.t. sum |z_i|^p <= R^p: coordinatewise shrinkage
  // w_i + theta p w_i^(p-1) = |u_i|, with theta fixed by the active norm.
  const double p = ball.space.p();
  const VectorXd a = u.cwiseAbs();
  const double target = std::pow(ball.radius, p);
  auto mass = [&](double theta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      acc += std::pow(ShrinkCoordinate(a[i], theta, p), p);
    }
    return acc;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (mass(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  VectorXd z(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double w = ShrinkCoordinate(a[i], hi, p);
    z[i] = u[i] < 0 ? -w : w;
  }
  // Land exactly on the sphere.
  const double zn = ball.space.norm(z);
  if (zn > 0) z *= ball.radius / zn;
  return ball.center + z;
}

VectorXd NormGradient(const NormSpace& space, const VectorXd& u) {
  VectorXd g = VectorXd::Zero(u.size());
  const double n = space.norm(u);
  if (n == 0.0) return g;
  if (space.is_euclidean()) return u / n;
  if (space.is_infinity()) {
    Eigen::Index k;
    u.cwiseAbs().maxCoeff(&k);
    g[k] = u[k] > 0 ? 1.0 : -1.0;
    return g;
  }
  const double p = space.p();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = std::abs(u[i]) / n;
    const double mag = std::pow(r, p - 1.0);
    g[i] = u[i] < 0 ? -mag : mag;
  }
  return g;
}

double OperatorNorm(const MatrixXd& m, const NormSpace& in,
                    const NormSpace& out) {
  if (m.size() == 0) return 0.0;
  if (in.is_euclidean() && out.is_euclidean()) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    return svd.singularValues()[0];
  }
  const int n = static_cast<int>(m.cols());
  auto ratio = [&](const VectorXd& x) {
    const double d = in.norm(x);
    return d > 0 ? out.norm(m * x) / d : 0.0;
  };
  double best = 0.0;
  VectorXd best_x = VectorXd::Unit(n, 0);
  auto consider = [&](const VectorXd& x) {
    const double r = ratio(x);
    if (r > best) {
      best = r;
      best_x = x;
    }
  };
  for (int i = 0; i < n; ++i) consider(VectorXd::Unit(n, i));
  if (n <= 12) {
    for (long mask = 0; mask < (1L << n); ++mask) {
      VectorXd s(n);
      for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
      consider(s);
    }
  }
  Rng rng(0x0be7a70f);
  for (int k = 0; k < 2000; ++k) consider(rng.NormalVector(n));
  // Shrinking random-perturbation hill climb from the best direction.
  double step = 0.25;
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    VectorXd base = best_x / in.norm(best_x);
    for (int k = 0; k < 16; ++k) {
      const VectorXd trial = base + step * rng.NormalVector(n);
      const double before = best;
      consider(trial);
      improved = improved || best > before;
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace hconv
