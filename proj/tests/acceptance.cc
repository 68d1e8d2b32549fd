// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hconv/banach_geometry.hpp"
#include "hconv/cli.hpp"
#include "hconv/convexity.hpp"
#include "hconv/localized_opt.hpp"
#include "hconv/problem_io.hpp"
#include "hconv/random.hpp"
#include "hconv/smooth_maps.hpp"
#include "test_maps.hpp"

namespace hconv {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::vector<double> EpsGrid() {
  std::vector<double> g;
  for (int k = 1; k <= 50; ++k) g.push_back(2.0 * k / 50);
  return g;
}

Outcome Moduli() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double p : {2.0, 3.0, 4.0}) {
    const NormSpace s(2, p);
    for (double e : EpsGrid()) {
      worst = std::max(worst, std::abs(ModulusBruteForce2d(s, e) - ModulusClosedForm(s, e)));
    }
  }
  const double secs = Since(t0);
  o.Require(worst <= 1e-4, "max |brute - closed| = " + Fmt(worst));
  o.Require(secs < 10.0, "took " + Fmt(secs) + " s");
  if (o.pass) o.detail = "max |brute - closed| " + Fmt(worst) + ", " + Fmt(secs) + " s";
  return o;
}

Outcome PowerType() {
  Outcome o;
  for (const auto& [p, c] : {std::pair{2.0, 0.125}, std::pair{1.5, 0.0625}}) {
    const NormSpace s(2, p);
    const PowerTypeConstant pc = PowerType2Constant(s);
    o.Require(pc.holds() && *pc.c == c, "constant for p=" + Fmt(p));
    for (double e : EpsGrid()) {
      const double d = ModulusBruteForce2d(s, e);
      if (d < c * e * e) o.Require(false, "p=" + Fmt(p) + " eps=" + Fmt(e));
    }
  }
  // p = 4: delta(eps) / eps^2 -> 0, below the smallest constant used above.
  const NormSpace s4(2, 4.0);
  o.Require(!PowerType2Constant(s4).holds(), "p=4 reported as power type 2");
  const double e = 0.008;
  const double ratio = ModulusBruteForce2d(s4, e) / (e * e);
  o.Require(ratio < 0.0625 && ModulusClosedForm(s4, e) < 0.0625 * e * e,
            "p=4 eps=0.008 not violating");
  if (o.pass) o.detail = "p=4 violated at eps=0.008, delta/eps^2 = " + Fmt(ratio);
  return o;
}

Outcome BallInclusion() {
  Outcome o;
  Rng rng(2024);
  int triples = 0;
  bool inflated_witness = false;
  for (double p : {1.5, 2.0}) {
    const NormSpace s(2, p);
    const double c = PowerType2Constant(s).value();
    for (int k = 0; k < 5000; ++k) {
      const VectorXd x0 = rng.NormalVector(2);
      const double r = rng.Uniform(0.1, 3.0);
      const Ball b(x0, r, s);
      const VectorXd x1 = SampleBall(b, rng, 0.5);
      const VectorXd x2 = SampleBall(b, rng, 0.5);
      ++triples;
      if (!BallInclusionCheck(s, x0, x1, x2, r, c, 20, k).passed) {
        o.Require(false, "triple " + std::to_string(k) + " p=" + Fmt(p));
      }
      if (!inflated_witness) {
        const CheckResult bad = BallInclusionCheck(s, x0, x1, x2, r, 1.0, 20, k);
        inflated_witness = !bad.passed && s.norm(bad.witness - x0) > r;
      }
    }
  }
  o.Require(inflated_witness, "no witness for c = 1");
  if (o.pass) o.detail = std::to_string(triples) + " triples pass; c=1 has a witness";
  return o;
}

Outcome MidpointDefectBound() {
  Outcome o;
  const std::vector<PolyMap> maps = {
      testing::PositiveQuadraticMap(), testing::RankDeficientMap(),
      testing::ShearParabolaMap(),     testing::MildQuadratic1d(),
      testing::Diagonal(2, 0.5),       testing::Square1d()};
  double square_ratio = 0.0;
  for (size_t m = 0; m < maps.size(); ++m) {
    const PolyMap& f = maps[m];
    const int n = f.n_in();
    const Ball region(VectorXd::Zero(n), 2.0, NormSpace::Euclidean(n));
    const LipschitzEstimate lip = LipschitzOfDerivative(
        f, region, NormSpace::Euclidean(f.n_out()), 2000, 42);
    o.Require(lip.exact(), "Lipschitz constant not exact for map " + std::to_string(m));
    Rng rng = Rng(7).Child(m);
    for (int k = 0; k < 1000; ++k) {
      const VectorXd x1 = SampleBall(region, rng, 0.3);
      const VectorXd x2 = SampleBall(region, rng, 0.3);
      const double d2 = (x1 - x2).squaredNorm();
      const double defect = MidpointDefect(f, x1, x2);
      if (defect > kMidpointDefectCoefficient * lip.value * d2 + 1e-10) {
        o.Require(false, "map " + std::to_string(m) + " pair " + std::to_string(k));
      }
      if (m + 1 == maps.size() && d2 > 1e-12) {
        square_ratio = std::max(square_ratio, defect / (lip.value * d2));
      }
    }
  }
  o.Require(square_ratio >= 0.124, "x^2 ratio " + Fmt(square_ratio));
  o.Require(square_ratio > 1.0 / 16.0, "1/16 not refuted");
  if (o.pass) o.detail = "x^2 attains ratio " + Fmt(square_ratio) + " > 1/16";
  return o;
}

Outcome MetricRegularity() {
  Outcome o;
  const NormSpace e2 = NormSpace::Euclidean(2);
  const VectorXd x0 = VectorXd::Zero(2);
  std::string detail;
  for (const auto& [name, f] : {std::pair{"identity", PolyMap::Identity(2)},
                                std::pair{"diag(2,0.5)", testing::Diagonal(2, 0.5)}}) {
    const RegularityCertificate c = ValidateMetricRegularity(
        f, x0, MetricRegConstant(f, x0, e2, e2), 1.0, 1.0, 1000, 42, e2, e2);
    o.Require(c.validated, std::string(name) + " not validated");
    const double factor = c.mu * c.sigma_min;
    o.Require(factor >= 1.0 && factor <= 2.05, std::string(name) + " mu*sigma = " + Fmt(factor));
    const RegularityCertificate fresh =
        MeasureRegularityRatio(f, x0, c, c.delta_mu, c.zeta, 1000, 4242, e2, e2);
    o.Require(fresh.validated && fresh.worst_ratio <= c.mu,
              std::string(name) + " fresh worst ratio " + Fmt(fresh.worst_ratio));
    detail += std::string(detail.empty() ? "" : ", ") + name + " mu=" + Fmt(c.mu) +
              " worst=" + Fmt(fresh.worst_ratio);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome ConvexityPrinciple() {
  Outcome o;
  CertifyOptions opt;  // 2000 pairs, seed 42
  double slowest = 0.0;
  auto run = [&](const PolyMap& f, const VectorXd& x0, const NormSpace& s, double eps) {
    const auto t0 = Clock::now();
    ConvexityCertificate c = CertifyConvexity(f, x0, s, eps, opt);
    slowest = std::max(slowest, Since(t0));
    return c;
  };
  const ProblemFile rd = LoadRegistry("remark-rank-deficient");
  const ProblemFile linf = LoadRegistry("remark-linf");
  const ProblemFile pq = LoadRegistry("positive-quadratic");
  for (double eps : {0.1, 0.5, 1.0}) {
    const ConvexityCertificate c = run(rd.Map(), rd.X0OrZero(), rd.space(), eps);
    bool gap = !c.witnesses.empty();
    for (const auto& w : c.witnesses) gap = gap && w.gap_lower_bound > 0.0;
    o.Require(c.verdict() == Verdict::kRefuted && gap,
              "rank-deficient not refuted at eps=" + Fmt(eps));
    o.Require(run(linf.Map(), linf.X0OrZero(), linf.space(), eps).verdict() ==
                  Verdict::kRefuted,
              "linf not refuted at eps=" + Fmt(eps));
  }
  const NormSpace e2 = NormSpace::Euclidean(2);
  const RadiusBound lb = EstimateRadius(linf.Map(), linf.X0OrZero(), e2);
  for (double eps : {lb.eps0, lb.eps0 / 2}) {
    o.Require(run(linf.Map(), linf.X0OrZero(), e2, eps).verdict() == Verdict::kCertified,
              "linf under p=2 not certified at eps=" + Fmt(eps));
  }
  const RadiusBound pb = EstimateRadius(pq.Map(), pq.X0OrZero(), pq.space());
  const ConvexityCertificate pc = run(pq.Map(), pq.X0OrZero(), pq.space(), pb.eps0);
  o.Require(pb.theta == 0.9, "theta");
  o.Require(pc.verdict() == Verdict::kCertified, "positive-quadratic not certified");
  o.Require(pc.max_preimage_residual <= 1e-8, "residual " + Fmt(pc.max_preimage_residual));
  o.Require(pc.max_norm_excess <= 1e-6, "norm excess " + Fmt(pc.max_norm_excess));
  o.Require(slowest < 60.0, "slowest run " + Fmt(slowest) + " s");
  if (o.pass) {
    o.detail = "eps0(pq)=" + Fmt(pb.eps0) + " residual " + Fmt(pc.max_preimage_residual) +
               ", slowest run " + Fmt(slowest) + " s";
  }
  return o;
}

struct DiskRun {
  std::string name;
  ConstrainedProblem problem;
  VectorXd x0;
  double eps;
  LocalizedSolution sol;
};

DiskRun SolveDisk(const std::string& name) {
  const ProblemFile f = LoadRegistry(name);
  ConstrainedProblem p = f.Problem();
  LocalizedSolution s =
      ComputeMultiplier(p, *f.x0, *f.eps, SolveLocalization(p, *f.x0, *f.eps), 42);
  return {name, std::move(p), *f.x0, *f.eps, std::move(s)};
}

// Brute-force minimiser over an 801 x 801 grid of the ball's bounding box.
std::pair<VectorXd, double> GridOracle(const DiskRun& d) {
  const int n = 800;
  const double h = 2.0 * d.eps / n;
  VectorXd best;
  double value = kInfinity;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const VectorXd x = d.x0 + Eigen::Vector2d(-d.eps + i * h, -d.eps + j * h);
      if (d.problem.space.norm(x - d.x0) > d.eps) continue;
      if (!d.problem.cone.Contains(d.problem.constraint.Evaluate(x))) continue;
      const double v = d.problem.Objective(x);
      if (v < value) {
        value = v;
        best = x;
      }
    }
  }
  return {best, value};
}

Outcome Localization() {
  Outcome o;
  std::string detail;
  for (const std::string name : {"disk-inactive", "disk-active"}) {
    const DiskRun d = SolveDisk(name);
    const auto [xg, vg] = GridOracle(d);
    const double dx = (d.sol.x_eps - xg).lpNorm<Eigen::Infinity>();
    o.Require(dx <= 2e-3, name + " |x - x_grid| = " + Fmt(dx));
    o.Require(std::abs(d.sol.value - vg) <= 2e-3, name + " value");
    o.Require(d.sol.boundary_gap <= 1e-4, name + " boundary gap " + Fmt(d.sol.boundary_gap));
    const double l = d.sol.lambda[0];
    if (name == "disk-inactive") {
      o.Require(std::abs(d.sol.value - 0.4) <= 2e-3 &&
                    (d.sol.x_eps - Eigen::Vector2d(0.4, 0.5)).lpNorm<Eigen::Infinity>() <= 2e-3,
                name + " not at (0.4, 0.5)");
      o.Require(std::abs(l) <= 1e-6, name + " lambda " + Fmt(l));
    } else {
      o.Require(l > 1e-3, name + " lambda " + Fmt(l));
    }
    detail += (detail.empty() ? "" : ", ") + name + " lambda=" + Fmt(l) +
              " |x - x_grid|=" + Fmt(dx);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome Duality() {
  Outcome o;
  std::string detail;
  for (const std::string name : {"disk-inactive", "disk-active"}) {
    const DiskRun d = SolveDisk(name);
    const DualityGap g = DualityGapEstimate(d.problem, d.x0, d.eps, d.sol, 200, 42);
    o.Require(g.gap >= -1e-6 && g.gap <= 1e-5, name + " gap " + Fmt(g.gap));
    const CheckResult saddle = SaddlePointCheck(d.problem, d.x0, d.eps, d.sol, 1000, 42, 1e-8);
    o.Require(saddle.passed, name + " saddle: " + saddle.detail);
    const double comp = d.sol.lambda.dot(d.problem.constraint.Evaluate(d.sol.x_eps));
    o.Require(std::abs(comp) <= 1e-8, name + " complementarity " + Fmt(comp));
    detail += (detail.empty() ? "" : ", ") + name + " gap=" + Fmt(g.gap);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome ValueFunctionCalmness() {
  Outcome o;
  std::string detail;
  for (const std::string name : {"disk-inactive", "disk-active"}) {
    const DiskRun d = SolveDisk(name);
    const CheckResult sub =
        SubgradientCheck(d.problem, d.x0, d.eps, d.sol, 0.05, 1000, 42, 1e-6);
    o.Require(sub.passed, name + " subgradient: " + sub.detail);
    o.Require(sub.samples >= 1000, name + " only " + std::to_string(sub.samples) +
                                       " feasible perturbations");
    const CalmnessResult calm = CalmnessCheck(d.problem, d.x0, d.eps, d.sol, 0.05, 1000, 42);
    o.Require(calm.passed, name + " calmness quotient " + Fmt(calm.quotient_lower_bound));
    detail += (detail.empty() ? "" : ", ") + name + " quotient=" +
              Fmt(calm.quotient_lower_bound) + " >= " + Fmt(calm.required);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome DeterminismAndIo() {
  Outcome o;
  const std::vector<std::vector<std::string>> commands = {
      {"modulus", "--p", "3", "--grid-points", "10"},
      {"certify", "--registry", "positive-quadratic", "--eps", "auto", "--samples", "500"},
      {"witness", "--registry", "remark-linf", "--eps", "0.5", "--samples", "200"},
      {"localize", "--registry", "disk-active", "--samples", "500"},
      {"duality", "--registry", "disk-inactive", "--samples", "300", "--lambda-grid", "50"},
      {"calm", "--registry", "disk-active", "--samples", "200"}};
  for (const auto& args : commands) {
    std::ostringstream a, b, err;
    const int ca = cli::Run(args, a, err);
    const int cb = cli::Run(args, b, err);
    o.Require(ca == cb && a.str() == b.str() && !a.str().empty(),
              "report differs for " + args[0]);
  }
  for (const std::string& name : RegistryNames()) {
    const std::string& text = RegistryText(name);
    const ProblemFile f = ParseProblem(text);
    o.Require(SerializeProblem(f) == text && ParseProblem(SerializeProblem(f)) == f,
              name + " does not round-trip");
  }
  if (o.pass) {
    o.detail = std::to_string(commands.size()) + " reports byte-identical, " +
               std::to_string(RegistryNames().size()) + " fixtures round-trip";
  }
  return o;
}

}  // namespace
}  // namespace hconv

int main() {
  using hconv::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"moduli", hconv::Moduli},
      {"power type", hconv::PowerType},
      {"ball inclusion", hconv::BallInclusion},
      {"midpoint defect", hconv::MidpointDefectBound},
      {"metric regularity", hconv::MetricRegularity},
      {"convexity principle", hconv::ConvexityPrinciple},
      {"localization", hconv::Localization},
      {"duality", hconv::Duality},
      {"value function and calmness", hconv::ValueFunctionCalmness},
      {"determinism and io", hconv::DeterminismAndIo}};
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = hconv::Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %-28s %6.1fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, hconv::Since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
