#include "hconv/smooth_maps.hpp"

#include "hconv/gauss_newton.hpp"
#include "hconv/random.hpp"

namespace hconv {

VectorXd Remainder(const PolyMap& f, const VectorXd& xbar, const VectorXd& h) {
  if (h.size() != xbar.size()) {
    throw DimensionMismatch("remainder: increment has wrong dimension");
  }
  return f.Evaluate(xbar + h) - f.Evaluate(xbar) - f.Jacobian(xbar) * h;
}

double MidpointDefect(const PolyMap& f, const VectorXd& x1, const VectorXd& x2,
                      const NormSpace& range) {
  if (x1.size() != x2.size()) {
    throw DimensionMismatch("midpoint defect: points differ in dimension");
  }
  const VectorXd d =
      0.5 * (f.Evaluate(x1) + f.Evaluate(x2)) - f.Evaluate(0.5 * (x1 + x2));
  return range.norm(d);
}

double MidpointDefect(const PolyMap& f, const VectorXd& x1,
                      const VectorXd& x2) {
  return MidpointDefect(f, x1, x2, NormSpace::Euclidean(f.n_out()));
}

namespace {

// D^2 f[h] as an n_out x n_in matrix (row i is (H_i h)^T).
MatrixXd SecondDerivativeAction(const std::vector<MatrixXd>& hessians,
                                const VectorXd& h) {
  const int m = static_cast<int>(hessians.size());
  MatrixXd out(m, h.size());
  for (int i = 0; i < m; ++i) out.row(i) = (hessians[i] * h).transpose();
  return out;
}

}  // namespace

LipschitzEstimate LipschitzOfDerivative(const PolyMap& f, const Ball& region,
                                        const NormSpace& range, int samples,
                                        std::uint64_t seed) {
  if (!(region.radius > 0.0)) {
    throw DomainError("Lipschitz estimate: region radius must be positive");
  }
  if (region.center.size() != f.n_in() || range.dim() != f.n_out()) {
    throw DimensionMismatch("Lipschitz estimate: spaces do not match map");
  }
  const NormSpace& domain = region.space;
  const int n = f.n_in();
  LipschitzEstimate est;
  est.region_center = region.center;
  est.region_radius = region.radius;
  Rng rng(seed);

  if (f.degree() <= 1) {
    est.kind = LipschitzEstimate::Kind::kExact;
    est.method = "affine map: derivative is constant";
    return est;
  }

  if (f.degree() == 2) {
    std::vector<MatrixXd> hessians;
    for (int i = 0; i < f.n_out(); ++i) {
      hessians.push_back(f.Hessian(i, region.center));
    }
    double best = 0.0;
    VectorXd best_h = VectorXd::Unit(n, 0);
    auto consider = [&](const VectorXd& h) {
      const double hn = domain.norm(h);
      if (hn == 0.0) return;
      const double v =
          OperatorNorm(SecondDerivativeAction(hessians, h / hn), domain, range);
      if (v > best) {
        best = v;
        best_h = h / hn;
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
    for (int k = 0; k < samples; ++k) consider(rng.NormalVector(n));
    double step = 0.25;
    for (int round = 0; round < 60; ++round) {
      const double before = best;
      const VectorXd base = best_h;
      for (int k = 0; k < 16; ++k) consider(base + step * rng.NormalVector(n));
      if (best <= before) step *= 0.5;
    }
    est.value = best;
    est.kind = LipschitzEstimate::Kind::kExact;
    est.method = "constant second derivative: direction sampling (" +
                 std::to_string(samples) + ") with refinement";
    return est;
  }

  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const VectorXd x = SampleBall(region, rng, 0.5);
    VectorXd x2;
    if (k % 2 == 0) {
      x2 = SampleBall(region, rng, 0.5);
    } else {
      // Nearby pairs probe the local second derivative.
      x2 = ProjectOntoBall(region,
                           x + 1e-3 * region.radius * SampleUnitSphere(domain, rng));
    }
    const double d = domain.norm(x - x2);
    if (d < 1e-12) continue;
    const double v =
        OperatorNorm(f.Jacobian(x) - f.Jacobian(x2), domain, range) / d;
    best = std::max(best, v);
  }
  est.value = best;
  est.kind = LipschitzEstimate::Kind::kSampledLowerBound;
  est.method = "sampled pairs (" + std::to_string(samples) + "), lower bound";
  return est;
}

SurjectivityResult SurjectivityCheck(const PolyMap& f, const VectorXd& x0) {
  const MatrixXd jac = f.Jacobian(x0);
  Eigen::JacobiSVD<MatrixXd> svd(jac);
  SurjectivityResult out;
  out.singular_values = svd.singularValues();
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values[i] > kRankTolerance) ++out.rank;
  }
  out.onto = out.rank == f.n_out();
  return out;
}

RegularityCertificate MetricRegConstant(const PolyMap& f, const VectorXd& x0,
                                        const NormSpace& domain,
                                        const NormSpace& range) {
  const SurjectivityResult s = SurjectivityCheck(f, x0);
  if (!s.onto) {
    throw NotSurjective("Df(x0) is not onto: rank " + std::to_string(s.rank) +
                        " < " + std::to_string(f.n_out()));
  }
  RegularityCertificate cert;
  cert.sigma_min = s.singular_values[f.n_out() - 1];
  cert.mu = kRegularitySafetyFactor / cert.sigma_min *
            domain.equivalence_factor() * range.equivalence_factor();
  cert.method = "mu = 2/sigma_min(Df(x0))";
  if (!domain.is_euclidean() || !range.is_euclidean()) {
    cert.method += " x p-norm equivalence factors";
  }
  return cert;
}

RegularityCertificate MeasureRegularityRatio(
    const PolyMap& f, const VectorXd& x0, const RegularityCertificate& cert,
    double delta_mu, double zeta, int samples, std::uint64_t seed,
    const NormSpace& domain, const NormSpace& range) {
  RegularityCertificate out = cert;
  out.delta_mu = delta_mu;
  out.zeta = zeta;
  out.worst_ratio = 0.0;
  out.samples = 0;
  const Ball xs(x0, delta_mu, domain);
  const Ball ys(f.Evaluate(x0), zeta, range);
  const Rng root(seed);
  bool missing = false;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x = SampleBall(xs, rng, 0.5);
    const VectorXd y = SampleBall(ys, rng, 0.5);
    const double gap = range.norm(y - f.Evaluate(x));
    if (gap < 1e-14) continue;
    ++out.samples;
    const auto dist = [&](const VectorXd& z) { return domain.norm(z - x); };
    const PreimageResult pre =
        MultiStartPreimage(f, y, x, cert.mu * gap, rng, 8, dist);
    double ratio = kInfinity;
    if (pre.converged) {
      ratio = dist(pre.x) / gap;
    } else {
      missing = true;
    }
    if (ratio > out.worst_ratio || out.worst_x.size() == 0) {
      out.worst_ratio = std::max(out.worst_ratio, ratio);
      out.worst_x = x;
      out.worst_y = y;
    }
  }
  out.validated = !missing && out.worst_ratio <= out.mu;
  return out;
}

RegularityCertificate ValidateMetricRegularity(
    const PolyMap& f, const VectorXd& x0, const RegularityCertificate& cert,
    double delta_mu, double zeta, int samples, std::uint64_t seed,
    const NormSpace& domain, const NormSpace& range) {
  if (!(delta_mu > 0.0) || !(zeta > 0.0)) {
    throw DomainError("metric regularity: radii must be positive");
  }
  RegularityCertificate out;
  for (int shrink = 0; shrink <= 6; ++shrink) {
    const double scale = std::ldexp(1.0, -shrink);
    out = MeasureRegularityRatio(f, x0, cert, delta_mu * scale, zeta * scale,
                                 samples, seed, domain, range);
    out.shrinks = shrink;
    if (out.validated) break;
  }
  return out;
}

CheckResult LinearOpennessCheck(const PolyMap& f, const VectorXd& x0,
                                const RegularityCertificate& cert, int samples,
                                std::uint64_t seed, const NormSpace& domain,
                                const NormSpace& range) {
  if (!cert.validated) {
    throw PreconditionViolated("linear openness needs a validated certificate");
  }
  const double sigma = 1.0 / cert.mu;
  const Ball xs(x0, cert.delta_mu, domain);
  const Rng root(seed);
  CheckResult result;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x = SampleBall(xs, rng, 0.3);
    const double r = cert.delta_mu * rng.Uniform(0.05, 0.5);
    const VectorXd u = SampleUnitSphere(range, rng);
    const VectorXd target = f.Evaluate(x) + sigma * r * (1.0 - 1e-3) * u;
    const auto dist = [&](const VectorXd& z) { return domain.norm(z - x); };
    PreimageResult pre = SolvePreimage(f, target, x);
    if (!pre.converged || dist(pre.x) > r) {
      pre = MultiStartPreimage(f, target, x, 0.5 * r, rng, 8, dist);
    }
    ++result.samples;
    const double slack = pre.converged ? r - dist(pre.x) : -kInfinity;
    result.worst_slack = std::min(result.worst_slack, slack / r);
    if (slack < -1e-12 * r) {
      result.passed = false;
      result.witness = x;
      result.detail = "target at rate sigma*r has no preimage within r";
      return result;
    }
  }
  return result;
}

}  // namespace hconv
