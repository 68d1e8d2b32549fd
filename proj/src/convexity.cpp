#include "hconv/convexity.hpp"

#include <algorithm>
#include <cmath>

#include "hconv/banach_geometry.hpp"
#include "hconv/gauss_newton.hpp"
#include "hconv/random.hpp"

namespace hconv {

RadiusBound EstimateRadius(const PolyMap& f, const VectorXd& x0,
                           const NormSpace& space,
                           const RadiusOptions& options) {
  if (!(options.r > 0.0)) throw DomainError("estimate radius: r must be positive");
  if (!(options.theta > 0.0 && options.theta < 1.0)) {
    throw DomainError("estimate radius: theta must lie in (0, 1)");
  }
  RadiusBound out;
  out.r = options.r;
  out.theta = options.theta;
  out.c = PowerType2Constant(space).value();
  const NormSpace range = NormSpace::Euclidean(f.n_out());
  const RegularityCertificate cert = MetricRegConstant(f, x0, space, range);
  out.regularity =
      ValidateMetricRegularity(f, x0, cert, options.r, options.r,
                               options.validation_samples, options.seed,
                               space, range);
  if (!out.regularity.validated) {
    throw ValidationFailed(
        "metric regularity could not be validated after 6 halvings",
        out.regularity.worst_x, out.regularity.worst_y);
  }
  out.mu = out.regularity.mu;
  out.delta_mu = out.regularity.delta_mu;
  out.zeta = out.regularity.zeta;
  const LipschitzEstimate lip =
      LipschitzOfDerivative(f, Ball(x0, options.r, space), range,
                            options.lipschitz_samples, options.seed);
  out.lip = lip.value;
  out.lip_exact = lip.exact();
  const double term = 4.0 * out.c / (out.mu * (out.lip + 1.0));
  out.eps0 = options.theta * std::min({options.r, out.delta_mu, term});
  out.formula_used = "eps0 = theta * min{r, delta_mu, 4c/(mu(L+1))}";
  return out;
}

namespace {

struct Cell {
  VectorXd center;
  double lb;
};

}  // namespace

GapBound ImageGapBound(const PolyMap& f, const Ball& ball,
                       const VectorXd& target, int resolution) {
  const int n = f.n_in();
  if (n > 3) throw DimensionTooLarge("grid gap bound needs n_in <= 3");
  if (!(ball.radius > 0.0)) throw DomainError("grid gap bound: empty ball");
  if (resolution < 1) throw DomainError("grid gap bound: resolution < 1");
  const NormSpace& space = ball.space;
  const double lip = f.JacobianBoundOnBox(ball.center, ball.radius);
  const double corner =
      space.is_infinity() ? 1.0 : std::pow(static_cast<double>(n), 1.0 / space.p());

  int base = resolution;
  while (base % 2 == 0 && base > 25) base /= 2;

  GapBound out;
  double upper = kInfinity;
  double pruned = kInfinity;
  // Evaluates the cells of width h centred at `centers`, updating the upper
  // estimate, and keeps those that may still contain the minimum.
  auto evaluate = [&](const std::vector<VectorXd>& centers, double h) {
    const double half = 0.5 * h;
    const double slack = lip * half * std::sqrt(static_cast<double>(n));
    std::vector<Cell> cells;
    cells.reserve(centers.size());
    for (const VectorXd& c : centers) {
      const double d = space.norm(c - ball.center);
      if (d - half * corner > ball.radius) continue;
      const double m = (f.Evaluate(c) - target).norm();
      if (d <= ball.radius) upper = std::min(upper, m);
      cells.push_back({c, m - slack});
    }
    std::vector<Cell> keep;
    for (Cell& c : cells) {
      if (c.lb < upper) {
        keep.push_back(std::move(c));
      } else {
        pruned = std::min(pruned, c.lb);
      }
    }
    return keep;
  };
  auto split = [&](const std::vector<Cell>& cells, double h, int parts) {
    std::vector<VectorXd> centers;
    const double sub = h / parts;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= parts;
    for (const Cell& c : cells) {
      for (int idx = 0; idx < total; ++idx) {
        VectorXd x = c.center;
        int rest = idx;
        for (int i = 0; i < n; ++i) {
          x[i] += -0.5 * h + (rest % parts + 0.5) * sub;
          rest /= parts;
        }
        centers.push_back(std::move(x));
      }
    }
    return centers;
  };

  double h = 2.0 * ball.radius / base;
  std::vector<VectorXd> centers;
  {
    int total = 1;
    for (int i = 0; i < n; ++i) total *= base;
    for (int idx = 0; idx < total; ++idx) {
      VectorXd x(n);
      int rest = idx;
      for (int i = 0; i < n; ++i) {
        x[i] = ball.center[i] - ball.radius + (rest % base + 0.5) * h;
        rest /= base;
      }
      centers.push_back(std::move(x));
    }
  }
  std::vector<Cell> live = evaluate(centers, h);
  for (int res = base; res < resolution; res *= 2) {
    live = evaluate(split(live, h, 2), h / 2);
    h /= 2;
  }
  live = evaluate(split(live, h, 4), h / 4);
  h /= 4;

  double lb = pruned;
  for (const Cell& c : live) lb = std::min(lb, c.lb);
  out.lower_bound = lb;
  out.grid_minimum = upper;
  out.cell_slack = lip * 0.5 * h * std::sqrt(static_cast<double>(n));
  out.resolution = 4 * resolution;
  return out;
}

std::string ToString(Verdict v) {
  switch (v) {
    case Verdict::kCertified:
      return "CERTIFIED";
    case Verdict::kRefuted:
      return "REFUTED";
    case Verdict::kInconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

Verdict ConvexityCertificate::verdict() const {
  if (!witnesses.empty()) return Verdict::kRefuted;
  if (unconfirmed_candidates > 0 || max_preimage_residual > tol_res ||
      max_norm_excess > tol_ball) {
    return Verdict::kInconclusive;
  }
  return Verdict::kCertified;
}

ConvexityCertificate& ConvexityCertificate::Merge(
    const ConvexityCertificate& other) {
  pairs_tested += other.pairs_tested;
  pairs_skipped += other.pairs_skipped;
  max_preimage_residual =
      std::max(max_preimage_residual, other.max_preimage_residual);
  max_norm_excess = std::max(max_norm_excess, other.max_norm_excess);
  unconfirmed_candidates += other.unconfirmed_candidates;
  witnesses.insert(witnesses.end(), other.witnesses.begin(),
                   other.witnesses.end());
  return *this;
}

namespace {

bool Confirmed(const GapBound& g) {
  return g.lower_bound > 0.0 && g.lower_bound > 10.0 * g.cell_slack;
}

NonconvexityWitness MakeWitness(const PolyMap& f, const VectorXd& x1,
                                const VectorXd& x2, const GapBound& g) {
  NonconvexityWitness w;
  w.x1 = x1;
  w.x2 = x2;
  w.y1 = f.Evaluate(x1);
  w.y2 = f.Evaluate(x2);
  w.ybar = 0.5 * (w.y1 + w.y2);
  w.gap_lower_bound = g.lower_bound;
  w.cell_slack = g.cell_slack;
  w.resolution = g.resolution;
  return w;
}

struct Candidate {
  VectorXd x1;
  VectorXd x2;
  double badness;
};

}  // namespace

ConvexityCertificate CertifyConvexity(const PolyMap& f, const VectorXd& x0,
                                      const NormSpace& space, double eps,
                                      const CertifyOptions& options,
                                      std::vector<PairRecord>* records) {
  if (!(eps > 0.0)) throw EpsilonNonpositive("certify: eps must be positive");
  if (x0.size() != f.n_in() || space.dim() != f.n_in()) {
    throw DimensionMismatch("certify: x0 or space does not match the map");
  }
  const Ball ball(x0, eps, space);
  ConvexityCertificate cert;
  cert.eps = eps;
  cert.tol_res = options.tol_res;
  cert.tol_ball = options.tol_ball;
  const Rng root(options.seed);
  auto excess = [&](const VectorXd& x) {
    return std::max(0.0, space.norm(x - x0) / eps - 1.0);
  };
  auto accepted = [&](const PreimageResult& r) {
    return r.residual <= options.tol_res && excess(r.x) <= options.tol_ball;
  };
  std::vector<Candidate> candidates;
  for (int k = 0; k < options.n_pairs; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x1 = SampleBall(ball, rng, 0.7);
    const VectorXd x2 = SampleBall(ball, rng, 0.7);
    if (space.norm(x1 - x2) < 1e-9) {
      ++cert.pairs_skipped;
      continue;
    }
    ++cert.pairs_tested;
    const VectorXd ybar = 0.5 * (f.Evaluate(x1) + f.Evaluate(x2));
    const VectorXd xbar = 0.5 * (x1 + x2);
    PreimageResult pre = SolvePreimage(f, ybar, xbar);
    if (!accepted(pre)) {
      const auto score = [&](const VectorXd& x) {
        return space.norm(x - x0);
      };
      PreimageResult retry =
          MultiStartPreimage(f, ybar, xbar, 0.5 * eps, rng, 8, score);
      if (accepted(retry) || retry.residual < pre.residual) pre = retry;
    }
    const double ex = excess(pre.x);
    cert.max_preimage_residual = std::max(cert.max_preimage_residual, pre.residual);
    cert.max_norm_excess = std::max(cert.max_norm_excess, ex);
    if (records) records->push_back({x1, x2, ybar, pre.residual, ex});
    if (!accepted(pre)) candidates.push_back({x1, x2, pre.residual + ex});
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.badness > b.badness;
                   });
  int attempts = 0;
  int confirmed = 0;
  for (const Candidate& c : candidates) {
    const bool try_it = f.n_in() <= 3 && attempts < options.max_confirmations &&
                        confirmed < 4;
    if (!try_it) {
      if (confirmed == 0) ++cert.unconfirmed_candidates;
      continue;
    }
    ++attempts;
    const VectorXd ybar = 0.5 * (f.Evaluate(c.x1) + f.Evaluate(c.x2));
    const GapBound g = ImageGapBound(f, ball, ybar);
    if (Confirmed(g)) {
      cert.witnesses.push_back(MakeWitness(f, c.x1, c.x2, g));
      ++confirmed;
    } else {
      ++cert.unconfirmed_candidates;
    }
  }
  return cert;
}

std::optional<NonconvexityWitness> FindNonconvexityWitness(
    const PolyMap& f, const VectorXd& x0, const NormSpace& space, double eps,
    int budget, std::uint64_t seed) {
  const int n = f.n_in();
  if (n > 3) {
    throw DimensionTooLarge("witness search needs n_in <= 3, got " +
                            std::to_string(n));
  }
  if (!(eps > 0.0)) throw EpsilonNonpositive("witness: eps must be positive");
  if (x0.size() != n || space.dim() != n) {
    throw DimensionMismatch("witness: x0 or space does not match the map");
  }
  const Ball ball(x0, eps, space);

  // Boundary points along coordinate axes and sign patterns, paired with
  // each other, then random boundary pairs.
  std::vector<VectorXd> points;
  for (int i = 0; i < n; ++i) {
    points.push_back(x0 + eps * VectorXd::Unit(n, i));
    points.push_back(x0 - eps * VectorXd::Unit(n, i));
  }
  for (int mask = 0; mask < (1 << n); ++mask) {
    VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
    points.push_back(x0 + eps * s / space.norm(s));
  }
  std::vector<Candidate> pairs;
  for (size_t a = 0; a < points.size(); ++a) {
    for (size_t b = a + 1; b < points.size(); ++b) {
      pairs.push_back({points[a], points[b], 0.0});
    }
  }
  const Rng root(seed);
  for (int k = 0; k < budget; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x1 = SampleBall(ball, rng, 0.9);
    const VectorXd x2 = SampleBall(ball, rng, 0.9);
    pairs.push_back({x1, x2, 0.0});
  }

  // Screen on a coarse grid, then confirm the most promising few.
  for (Candidate& c : pairs) {
    const VectorXd ybar = 0.5 * (f.Evaluate(c.x1) + f.Evaluate(c.x2));
    c.badness = ImageGapBound(f, ball, ybar, 25).lower_bound;
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.badness > b.badness;
                   });
  std::optional<NonconvexityWitness> best;
  for (size_t k = 0; k < std::min<size_t>(4, pairs.size()); ++k) {
    const Candidate& c = pairs[k];
    const VectorXd ybar = 0.5 * (f.Evaluate(c.x1) + f.Evaluate(c.x2));
    const GapBound g = ImageGapBound(f, ball, ybar);
    if (!Confirmed(g)) continue;
    if (!best || g.lower_bound > best->gap_lower_bound) {
      best = MakeWitness(f, c.x1, c.x2, g);
    }
  }
  return best;
}

CheckResult BoundaryPreimageCheck(const PolyMap& f, const VectorXd& x0,
                                  const NormSpace& space, double eps,
                                  int samples, std::uint64_t seed) {
  if (!(eps > 0.0)) throw EpsilonNonpositive("boundary check: eps must be positive");
  const NormSpace range = NormSpace::Euclidean(f.n_out());
  const RegularityCertificate cert = MetricRegConstant(f, x0, space, range);
  const Ball inner(x0, eps * (1.0 - 1e-3), space);
  const Rng root(seed);
  CheckResult result;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x = SampleBall(inner, rng, 0.3);
    const double room = eps - space.norm(x - x0);
    const double delta = std::min(1e-4, 0.5 * room / cert.mu);
    const VectorXd fx = f.Evaluate(x);
    for (int j = 0; j < 20; ++j) {
      const VectorXd target = fx + delta * SampleUnitSphere(range, rng);
      const auto dist = [&](const VectorXd& z) { return space.norm(z - x); };
      PreimageResult pre = SolvePreimage(f, target, x);
      auto inside = [&](const PreimageResult& r) {
        return r.converged && space.norm(r.x - x0) <= eps;
      };
      if (!inside(pre)) {
        pre = MultiStartPreimage(f, target, x, 0.5 * room, rng, 8, dist);
      }
      ++result.samples;
      const double slack = pre.converged ? (eps - space.norm(pre.x - x0)) / eps
                                         : -kInfinity;
      result.worst_slack = std::min(result.worst_slack, slack);
      if (!inside(pre)) {
        result.passed = false;
        result.witness = x;
        result.detail = "perturbed image point has no preimage in the ball";
        return result;
      }
    }
  }
  return result;
}

}  // namespace hconv
