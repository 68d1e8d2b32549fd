#include "hconv/localized_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "hconv/random.hpp"
#include "hconv/smooth_maps.hpp"

namespace hconv {

ConstrainedProblem::ConstrainedProblem(PolyMap phi, PolyMap g, ConeSpec c,
                                       NormSpace s)
    : objective(std::move(phi)),
      constraint(std::move(g)),
      cone(std::move(c)),
      space(s) {
  if (objective.n_out() != 1) {
    throw DimensionMismatch("objective must be scalar-valued");
  }
  if (objective.n_in() != space.dim() || constraint.n_in() != space.dim()) {
    throw DimensionMismatch("objective/constraint inputs differ from space");
  }
  if (constraint.n_out() != cone.dim()) {
    throw DimensionMismatch("constraint outputs differ from cone dimension");
  }
}

double ConstrainedProblem::FeasibilityResidual(const VectorXd& x) const {
  return cone.Distance(constraint.Evaluate(x));
}

double ConstrainedProblem::Lagrangian(const VectorXd& lambda,
                                      const VectorXd& x) const {
  if (lambda.size() != m()) throw DimensionMismatch("multiplier dimension");
  return Objective(x) + lambda.dot(constraint.Evaluate(x));
}

ConstrainedProblem ConstrainedProblem::Perturbed(const VectorXd& y) const {
  return ConstrainedProblem(objective, constraint.PlusConstant(y), cone, space);
}

std::pair<double, VectorXd> ImageMap(const ConstrainedProblem& p,
                                     const VectorXd& x0, const VectorXd& x) {
  if (x0.size() != p.n() || x.size() != p.n()) {
    throw DimensionMismatch("image map: point dimension");
  }
  return {p.Objective(x) - p.Objective(x0), p.constraint.Evaluate(x)};
}

bool LocalOptimalityProbe(const ConstrainedProblem& p, const VectorXd& x0,
                          double eps, int samples, std::uint64_t seed) {
  if (eps < 0.0) throw EpsilonNonpositive("probe: eps must be nonnegative");
  if (eps == 0.0) return true;
  const Ball ball(x0, eps, p.space);
  const double f0 = p.Objective(x0);
  const Rng root(seed);
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x = SampleBall(ball, rng, 0.5);
    if (p.Feasible(x) && p.Objective(x) < f0 - 1e-10) return false;
  }
  return true;
}

namespace {

std::string Short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// phi + <lambda, g> as a scalar polynomial map.
PolyMap LagrangianMap(const ConstrainedProblem& p, const VectorXd& lambda) {
  auto terms = p.objective.components()[0].terms();
  for (int i = 0; i < p.m(); ++i) {
    if (lambda[i] == 0.0) continue;
    for (auto t : p.constraint.components()[i].terms()) {
      t.coeff *= lambda[i];
      terms.push_back(std::move(t));
    }
  }
  return PolyMap(p.n(), {Polynomial(p.n(), std::move(terms))});
}

// min phi(x) subject to g(x) in C (when g is given) and x in the ball.
struct BallProblem {
  const PolyMap* phi;
  const PolyMap* g;
  const ConeSpec* cone;
  Ball ball;

  int m() const { return g ? g->n_out() : 0; }
  double Value(const VectorXd& x) const { return phi->Evaluate(x)[0]; }
  VectorXd Gradient(const VectorXd& x) const {
    return phi->Jacobian(x).row(0).transpose();
  }
  double ConeResidual(const VectorXd& x) const {
    return g ? cone->Distance(g->Evaluate(x)) : 0.0;
  }
  double BallExcess(const VectorXd& x) const {
    return ball.space.norm(x - ball.center) - ball.radius;
  }
  bool Admissible(const VectorXd& x) const {
    return ConeResidual(x) <= 1e-8 &&
           ball.space.norm(x - ball.center) <= ball.radius * (1.0 + 1e-12);
  }
};

double PenaltyValue(const BallProblem& bp, const VectorXd& x, double rho,
                    VectorXd* grad) {
  double val = bp.Value(x);
  if (grad) *grad = bp.Gradient(x);
  if (bp.g) {
    const VectorXd gx = bp.g->Evaluate(x);
    const VectorXd viol = gx - bp.cone->Project(gx);
    val += 0.5 * rho * viol.squaredNorm();
    if (grad) *grad += rho * bp.g->Jacobian(x).transpose() * viol;
  }
  const VectorXd u = x - bp.ball.center;
  const double b = bp.ball.space.norm(u) - bp.ball.radius;
  if (b > 0.0) {
    val += 0.5 * rho * b * b;
    if (grad) *grad += rho * b * NormGradient(bp.ball.space, u);
  }
  return val;
}

VectorXd Bfgs(const BallProblem& bp, double rho, VectorXd x) {
  const int n = static_cast<int>(x.size());
  MatrixXd h = MatrixXd::Identity(n, n);
  VectorXd g;
  double f = PenaltyValue(bp, x, rho, &g);
  bool scaled = false;
  for (int it = 0; it < 200; ++it) {
    if (g.norm() <= 1e-13 * (1.0 + std::abs(f))) break;
    VectorXd d = -h * g;
    if (d.dot(g) >= 0.0) {
      h.setIdentity();
      d = -g;
    }
    double t = 1.0;
    VectorXd xn;
    VectorXd gn;
    double fn = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      xn = x + t * d;
      fn = PenaltyValue(bp, xn, rho, &gn);
      if (fn <= f + 1e-4 * t * d.dot(g)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const VectorXd s = xn - x;
    const VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double r = 1.0 / sy;
      const MatrixXd v = MatrixXd::Identity(n, n) - r * s * y.transpose();
      h = v * h * v.transpose() + r * s * s.transpose();
    }
    const bool stalled = std::abs(f - fn) <= 1e-16 * (1.0 + std::abs(f)) &&
                         s.norm() <= 1e-15 * (1.0 + x.norm());
    x = xn;
    f = fn;
    g = gn;
    if (stalled) break;
  }
  return x;
}

VectorXd PenaltyPath(const BallProblem& bp, VectorXd x) {
  double rho = 1.0;
  for (int round = 0; round < 12; ++round, rho *= 10.0) {
    x = Bfgs(bp, rho, x);
    if (round >= 1 && bp.ConeResidual(x) <= 1e-14 && bp.BallExcess(x) <= 0.0) {
      break;
    }
  }
  return x;
}

struct Polished {
  VectorXd x;
  VectorXd lambda;
  double nu = 0.0;
  double stationarity = kInfinity;
  bool ok = false;
};

// Derivative of the ball normal NormGradient(x - c).
MatrixXd NormalDerivative(const NormSpace& space, const VectorXd& u) {
  const int n = static_cast<int>(u.size());
  if (space.is_euclidean()) {
    const double r = u.norm();
    const VectorXd nu = u / r;
    return (MatrixXd::Identity(n, n) - nu * nu.transpose()) / r;
  }
  MatrixXd out(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(u[j]));
    const VectorXd e = VectorXd::Unit(n, j) * h;
    out.col(j) =
        (NormGradient(space, u + e) - NormGradient(space, u - e)) / (2.0 * h);
  }
  return out;
}

// Newton on the KKT system of one active set. Returns false when Newton
// does not reach a small residual.
bool NewtonOnActiveSet(const BallProblem& bp, const std::vector<int>& active,
                       bool ball_active, Polished* out) {
  const int n = static_cast<int>(out->x.size());
  const int a = static_cast<int>(active.size());
  const int nb = ball_active ? 1 : 0;
  const int dim = n + a + nb;
  const NormSpace& space = bp.ball.space;

  auto residual = [&](const VectorXd& z, MatrixXd* jac) {
    const VectorXd x = z.head(n);
    VectorXd f(dim);
    VectorXd grad = bp.Gradient(x);
    MatrixXd hess;
    if (jac) {
      jac->setZero(dim, dim);
      hess = bp.phi->Hessian(0, x);
    }
    MatrixXd jg;
    VectorXd gx;
    if (bp.g) {
      jg = bp.g->Jacobian(x);
      gx = bp.g->Evaluate(x);
    }
    for (int k = 0; k < a; ++k) {
      const int i = active[k];
      const double l = z[n + k];
      grad += l * jg.row(i).transpose();
      f[n + k] = gx[i];
      if (jac) {
        hess += l * bp.g->Hessian(i, x);
        jac->block(0, n + k, n, 1) = jg.row(i).transpose();
        jac->block(n + k, 0, 1, n) = jg.row(i);
      }
    }
    if (ball_active) {
      const VectorXd u = x - bp.ball.center;
      const VectorXd normal = NormGradient(space, u);
      const double nu = z[n + a];
      grad += nu * normal;
      f[n + a] = space.norm(u) - bp.ball.radius;
      if (jac) {
        hess += nu * NormalDerivative(space, u);
        jac->block(0, n + a, n, 1) = normal;
        jac->block(n + a, 0, 1, n) = normal.transpose();
      }
    }
    f.head(n) = grad;
    if (jac) jac->topLeftCorner(n, n) = hess;
    return f;
  };

  VectorXd z(dim);
  z.head(n) = out->x;
  {
    // Multiplier guess from least squares on the stationarity equation.
    const VectorXd x = out->x;
    MatrixXd cols(n, a + nb);
    MatrixXd jg;
    if (bp.g) jg = bp.g->Jacobian(x);
    for (int k = 0; k < a; ++k) cols.col(k) = jg.row(active[k]).transpose();
    if (ball_active) cols.col(a) = NormGradient(space, x - bp.ball.center);
    if (a + nb > 0) {
      z.tail(a + nb) =
          cols.completeOrthogonalDecomposition().solve(-bp.Gradient(x));
    }
  }
  MatrixXd jac;
  VectorXd f = residual(z, &jac);
  double fn = f.norm();
  for (int it = 0; it < 60 && fn > 1e-13; ++it) {
    const VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      const VectorXd trial = z + t * step;
      const VectorXd ft = residual(trial, nullptr);
      if (ft.norm() < (1.0 - 1e-4 * t) * fn) {
        z = trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    f = residual(z, &jac);
    fn = f.norm();
  }
  out->x = z.head(n);
  out->lambda = VectorXd::Zero(bp.m());
  for (int k = 0; k < a; ++k) out->lambda[active[k]] = z[n + k];
  out->nu = ball_active ? z[n + a] : 0.0;
  out->stationarity = f.head(n).norm();
  return fn <= 1e-9;
}

Polished KktPolish(const BallProblem& bp, const VectorXd& start) {
  Polished out;
  out.x = start;
  const int m = bp.m();
  std::vector<bool> active(m, false);
  if (bp.g) {
    const VectorXd gx = bp.g->Evaluate(start);
    for (int i = 0; i < m; ++i) {
      active[i] = bp.cone->kind(i) == ConeSpec::Kind::kZero || gx[i] >= -1e-6;
    }
  }
  bool ball_active = bp.BallExcess(start) >= -1e-6 * bp.ball.radius;
  const int n = static_cast<int>(start.size());
  for (int attempt = 0; attempt < 2 * (n + m) + 2; ++attempt) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i) {
      if (active[i]) idx.push_back(i);
    }
    Polished trial;
    trial.x = start;
    if (!NewtonOnActiveSet(bp, idx, ball_active, &trial)) return out;
    // Drop the most negative sign-constrained multiplier.
    int drop = -2;
    double worst = -1e-10;
    for (int i : idx) {
      if (bp.cone->kind(i) == ConeSpec::Kind::kNonpositive &&
          trial.lambda[i] < worst) {
        worst = trial.lambda[i];
        drop = i;
      }
    }
    if (ball_active && trial.nu < worst) drop = -1;
    if (drop == -1) {
      ball_active = false;
      continue;
    }
    if (drop >= 0) {
      active[drop] = false;
      continue;
    }
    // Add the most violated inactive constraint.
    int add = -2;
    double most = 1e-10;
    if (bp.g) {
      const VectorXd gx = bp.g->Evaluate(trial.x);
      for (int i = 0; i < m; ++i) {
        if (!active[i] && gx[i] > most) {
          most = gx[i];
          add = i;
        }
      }
    }
    if (!ball_active && bp.BallExcess(trial.x) > 1e-12 * bp.ball.radius) {
      add = -1;
    }
    if (add == -1) {
      ball_active = true;
      continue;
    }
    if (add >= 0) {
      active[add] = true;
      continue;
    }
    trial.ok = true;
    return trial;
  }
  return out;
}

struct LocalResult {
  VectorXd x;
  double value = kInfinity;
  Polished polish;
  int polished = 0;
  int starts = 0;
};

bool Better(double v, const VectorXd& x, double best_v, const VectorXd& best_x) {
  if (best_x.size() == 0) return true;
  const double tie = 1e-12 * (1.0 + std::abs(best_v));
  if (v < best_v - tie) return true;
  if (v > best_v + tie) return false;
  return std::lexicographical_compare(x.data(), x.data() + x.size(),
                                      best_x.data(), best_x.data() + best_x.size());
}

std::optional<LocalResult> SolveOnBall(const BallProblem& bp,
                                       const std::vector<VectorXd>& starts) {
  LocalResult best;
  bool found = false;
  for (const VectorXd& s : starts) {
    ++best.starts;
    const VectorXd xp = PenaltyPath(bp, s);
    Polished pol = KktPolish(bp, xp);
    VectorXd x;
    if (pol.ok && bp.Admissible(pol.x) &&
        bp.Value(pol.x) <= bp.Value(xp) + 1e-6 * (1.0 + std::abs(bp.Value(xp)))) {
      x = pol.x;
      ++best.polished;
    } else {
      x = ProjectOntoBall(bp.ball, xp);
      if (!bp.Admissible(x)) continue;
      pol = Polished();
    }
    const double v = bp.Value(x);
    if (Better(v, x, best.value, best.x)) {
      best.x = x;
      best.value = v;
      best.polish = pol;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

std::vector<VectorXd> Starts(const Ball& ball, const VectorXd& warm, int count,
                             std::uint64_t seed) {
  std::vector<VectorXd> out{ball.center};
  if (warm.size() == ball.center.size()) out.push_back(warm);
  const Rng root(seed);
  for (int k = 0; k < count; ++k) {
    Rng rng = root.Child(k);
    out.push_back(SampleBall(ball, rng, 0.3));
  }
  return out;
}

// A point of C- with magnitude up to 10, as a random nonnegative
// combination of the generators.
VectorXd SampleDual(const std::vector<VectorXd>& gens, int m, Rng& rng) {
  VectorXd l = VectorXd::Zero(m);
  for (const VectorXd& g : gens) l += rng.Uniform() * g;
  const double norm = l.norm();
  if (norm > 0.0) l *= rng.Uniform(0.0, 10.0) / norm;
  return l;
}

void RequireMultiplier(const ConstrainedProblem& p, const LocalizedSolution& sol) {
  if (sol.lambda.size() != p.m()) {
    throw PreconditionViolated("solution has no multiplier; run ComputeMultiplier");
  }
}

}  // namespace

LocalizedSolution SolveLocalization(const ConstrainedProblem& p,
                                    const VectorXd& x0, double eps,
                                    const SolveOptions& options) {
  if (!(eps > 0.0)) throw EpsilonNonpositive("localization: eps must be positive");
  if (x0.size() != p.n()) throw DimensionMismatch("localization: x0 dimension");
  if (options.check_feasible_x0 && !p.Feasible(x0)) {
    throw Infeasible("x0 is infeasible: |g(x0) - P_C g(x0)| = " +
                     Short(p.FeasibilityResidual(x0)));
  }
  if (options.check_regularity) {
    const PolyMap stacked = PolyMap::Stack(p.objective, p.constraint);
    const SurjectivityResult s = SurjectivityCheck(stacked, x0);
    if (!s.onto) {
      throw NotRegular("D(phi, g)(x0) is not onto: rank " +
                       std::to_string(s.rank) + " < " +
                       std::to_string(stacked.n_out()));
    }
  }
  const BallProblem bp{&p.objective, &p.constraint, &p.cone,
                       Ball(x0, eps, p.space)};
  const auto res = SolveOnBall(
      bp, Starts(bp.ball, options.warm_start, options.starts, options.seed));
  if (!res) throw Infeasible("no feasible point found in B(x0, eps)");
  LocalizedSolution sol;
  sol.x_eps = res->x;
  sol.value = res->value;
  sol.nu = res->polish.nu;
  sol.boundary_gap = std::abs(p.space.norm(res->x - x0) - eps);
  sol.diagnostics.feasibility_residual = p.FeasibilityResidual(res->x);
  sol.diagnostics.stationarity_residual = res->polish.stationarity;
  sol.diagnostics.starts = res->starts;
  sol.diagnostics.polished_starts = res->polished;
  if (!res->polish.ok) {
    sol.diagnostics.notes.push_back("KKT polish did not converge at x_eps");
  }
  if (sol.boundary_gap > 1e-4) {
    sol.diagnostics.notes.push_back("x_eps is not on the boundary of the ball");
  }
  return sol;
}

LocalizedSolution ComputeMultiplier(const ConstrainedProblem& p,
                                    const VectorXd& x0, double eps,
                                    const LocalizedSolution& sol,
                                    std::uint64_t seed, int samples) {
  const int n = p.n();
  const int m = p.m();
  const VectorXd& x = sol.x_eps;
  const VectorXd gx = p.constraint.Evaluate(x);
  const VectorXd grad = p.objective.Jacobian(x).row(0).transpose();
  const MatrixXd jg = p.constraint.Jacobian(x);
  const bool ball_active = sol.boundary_gap <= 1e-7 * std::max(1.0, eps);
  const VectorXd normal = NormGradient(p.space, x - x0);

  // Columns of the stationarity system and whether each is sign-constrained.
  std::vector<int> coord;  // constraint index, or -1 for the ball
  std::vector<bool> signed_var;
  for (int i = 0; i < m; ++i) {
    const bool zero = p.cone.kind(i) == ConeSpec::Kind::kZero;
    if (zero || gx[i] >= -1e-7) {
      coord.push_back(i);
      signed_var.push_back(!zero);
    }
  }
  if (ball_active) {
    coord.push_back(-1);
    signed_var.push_back(true);
  }
  const int k = static_cast<int>(coord.size());
  std::vector<int> sign_idx;
  for (int j = 0; j < k; ++j) {
    if (signed_var[j]) sign_idx.push_back(j);
  }
  if (sign_idx.size() > 16) {
    throw MultiplierNotFound("too many active sign-constrained multipliers");
  }
  auto column = [&](int j) -> VectorXd {
    return coord[j] < 0 ? normal : VectorXd(jg.row(coord[j]).transpose());
  };
  VectorXd best_coef = VectorXd::Zero(k);
  double best_res = grad.norm();
  // Nonnegative least squares by enumerating which sign-constrained
  // variables are held at zero.
  for (long mask = 0; mask < (1L << sign_idx.size()); ++mask) {
    std::vector<int> free;
    for (int j = 0; j < k; ++j) {
      const auto pos = std::find(sign_idx.begin(), sign_idx.end(), j);
      if (pos != sign_idx.end() && ((mask >> (pos - sign_idx.begin())) & 1)) {
        continue;
      }
      free.push_back(j);
    }
    if (free.empty()) continue;
    MatrixXd a(n, free.size());
    for (size_t c = 0; c < free.size(); ++c) a.col(c) = column(free[c]);
    const VectorXd sol_free = a.completeOrthogonalDecomposition().solve(-grad);
    bool ok = true;
    for (size_t c = 0; c < free.size(); ++c) {
      if (signed_var[free[c]] && sol_free[c] < -1e-12) ok = false;
    }
    if (!ok) continue;
    const double res = (grad + a * sol_free).norm();
    if (res < best_res - 1e-15) {
      best_res = res;
      best_coef.setZero();
      for (size_t c = 0; c < free.size(); ++c) {
        best_coef[free[c]] = std::max(sol_free[c], signed_var[free[c]] ? 0.0 : -kInfinity);
      }
    }
  }
  VectorXd lambda_ls = VectorXd::Zero(m);
  double nu_ls = 0.0;
  for (int j = 0; j < k; ++j) {
    if (coord[j] < 0) {
      nu_ls = best_coef[j];
    } else {
      lambda_ls[coord[j]] = best_coef[j];
    }
  }

  // Sampled separation with rho = 1: maximise over admissible lambda the
  // smallest phi(x) - phi(x_eps) + <lambda, g(x)> over sampled x.
  const Ball ball(x0, eps, p.space);
  const Rng root(seed);
  std::vector<double> av{0.0};
  std::vector<VectorXd> bv{gx};
  for (int s = 0; s < samples; ++s) {
    Rng rng = root.Child(s);
    const VectorXd xs = SampleBall(ball, rng, 0.5);
    av.push_back(p.Objective(xs) - sol.value);
    bv.push_back(p.constraint.Evaluate(xs));
  }
  auto separation = [&](const VectorXd& l) {
    double h = kInfinity;
    for (size_t s = 0; s < av.size(); ++s) h = std::min(h, av[s] + l.dot(bv[s]));
    return h;
  };
  std::vector<bool> movable(m, false);
  for (int i = 0; i < m; ++i) {
    movable[i] = p.cone.kind(i) == ConeSpec::Kind::kZero || gx[i] >= -1e-7;
  }
  auto admissible = [&](VectorXd l) {
    for (int i = 0; i < m; ++i) {
      if (!movable[i]) {
        l[i] = 0.0;
      } else if (p.cone.kind(i) == ConeSpec::Kind::kNonpositive) {
        l[i] = std::max(l[i], 0.0);
      }
    }
    return l;
  };
  VectorXd lambda_sep = admissible(lambda_ls);
  double h_sep = separation(lambda_sep);
  double step = 0.5 * std::max(1.0, lambda_sep.norm());
  for (int it = 0; it < 4000 && step > 1e-12; ++it) {
    bool improved = false;
    for (int i = 0; i < m && !improved; ++i) {
      if (!movable[i]) continue;
      for (double sgn : {1.0, -1.0}) {
        VectorXd trial = lambda_sep;
        trial[i] += sgn * step;
        trial = admissible(trial);
        const double h = separation(trial);
        if (h > h_sep) {
          lambda_sep = trial;
          h_sep = h;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  LocalizedSolution out = sol;
  SolveDiagnostics& d = out.diagnostics;
  d.least_squares_residual = best_res;
  d.least_squares_slack = separation(lambda_ls);
  d.separation_slack = h_sep;
  d.separation_alpha = h_sep;
  d.multiplier_discrepancy =
      std::abs(d.least_squares_slack - d.separation_slack) > 1e-3;
  if (d.multiplier_discrepancy) {
    d.notes.push_back("least-squares and separation multipliers disagree");
  }
  if (best_res <= 1e-4) {
    out.lambda = lambda_ls;
    out.nu = nu_ls;
    d.multiplier_method = "stationarity least squares";
  } else if (-h_sep <= 1e-4) {
    out.lambda = lambda_sep;
    const VectorXd rest = grad + jg.transpose() * lambda_sep;
    out.nu = ball_active ? std::max(0.0, -rest.dot(normal) / normal.squaredNorm())
                         : 0.0;
    d.multiplier_method = "sampled separation";
  } else {
    throw MultiplierNotFound(
        "stationarity residual " + Short(best_res) + " and separation slack " +
        Short(h_sep) + " exceed 1e-4");
  }
  d.stationarity_residual =
      (grad + jg.transpose() * out.lambda + out.nu * normal).norm();
  return out;
}

CheckResult CheckLagrangianMin(const ConstrainedProblem& p, const VectorXd& x0,
                               double eps, const LocalizedSolution& sol,
                               int samples, std::uint64_t seed, double tol) {
  RequireMultiplier(p, sol);
  const Ball ball(x0, eps, p.space);
  const double base = p.Lagrangian(sol.lambda, sol.x_eps);
  const Rng root(seed);
  CheckResult result;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd x = SampleBall(ball, rng, 0.5);
    const double slack = p.Lagrangian(sol.lambda, x) - base;
    ++result.samples;
    result.worst_slack = std::min(result.worst_slack, slack);
    if (slack < -tol) {
      result.passed = false;
      result.witness = x;
      result.detail = "L(lambda_eps, x) < L(lambda_eps, x_eps)";
      return result;
    }
  }
  return result;
}

CheckResult SaddlePointCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             int samples, std::uint64_t seed, double tol) {
  RequireMultiplier(p, sol);
  CheckResult result;
  const VectorXd gx = p.constraint.Evaluate(sol.x_eps);
  if (!p.cone.DualContains(sol.lambda, tol)) {
    result.passed = false;
    result.witness = sol.lambda;
    result.detail = "lambda_eps is not in the negative dual cone";
    return result;
  }
  const double comp = sol.lambda.dot(gx);
  if (std::abs(comp) > tol) {
    result.passed = false;
    result.witness = sol.lambda;
    result.worst_slack = -std::abs(comp);
    result.detail = "complementarity <lambda_eps, g(x_eps)> = " +
                    Short(comp);
    return result;
  }
  const Ball ball(x0, eps, p.space);
  const double base = p.Lagrangian(sol.lambda, sol.x_eps);
  const auto gens = p.cone.DualGenerators();
  const Rng root(seed);
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd l = SampleDual(gens, p.m(), rng);
    const double left = base - p.Lagrangian(l, sol.x_eps);
    const VectorXd x = SampleBall(ball, rng, 0.5);
    const double right = p.Lagrangian(sol.lambda, x) - base;
    result.samples += 2;
    result.worst_slack = std::min({result.worst_slack, left, right});
    if (left < -tol) {
      result.passed = false;
      result.witness = l;
      result.detail = "L(lambda, x_eps) > L(lambda_eps, x_eps) for this lambda";
      return result;
    }
    if (right < -tol) {
      result.passed = false;
      result.witness = x;
      result.detail = "L(lambda_eps, x) < L(lambda_eps, x_eps) for this x";
      return result;
    }
  }
  return result;
}

DualityGap DualityGapEstimate(const ConstrainedProblem& p, const VectorXd& x0,
                              double eps, const LocalizedSolution& sol,
                              int lambda_grid, std::uint64_t seed) {
  RequireMultiplier(p, sol);
  const Ball ball(x0, eps, p.space);
  const auto gens = p.cone.DualGenerators();
  const Rng root(seed);
  std::vector<VectorXd> lambdas{sol.lambda, VectorXd::Zero(p.m())};
  for (int k = 0; k < lambda_grid; ++k) {
    Rng rng = root.Child(k);
    if (k % 2 == 0) {
      lambdas.push_back(SampleDual(gens, p.m(), rng));
    } else {
      // Near lambda_eps, where the dual function peaks.
      const double scale = 0.1 * (1.0 + sol.lambda.norm());
      lambdas.push_back(
          p.cone.ProjectDual(sol.lambda + scale * rng.Uniform() *
                                               rng.NormalVector(p.m())));
    }
  }
  DualityGap out;
  out.primal = sol.value;
  for (size_t k = 0; k < lambdas.size(); ++k) {
    const VectorXd& l = lambdas[k];
    const PolyMap lag = LagrangianMap(p, l);
    const BallProblem bp{&lag, nullptr, nullptr, ball};
    double inner = p.Lagrangian(l, sol.x_eps);
    const auto res = SolveOnBall(
        bp, Starts(ball, sol.x_eps, 2, root.Child(1000003 + k).seed()));
    if (res) inner = std::min(inner, p.Lagrangian(l, res->x));
    ++out.lambdas;
    if (inner > out.dual) {
      out.dual = inner;
      out.best_lambda = l;
    }
  }
  out.gap = out.primal - out.dual;
  return out;
}

ValueFunctionSample ValueFunction(const ConstrainedProblem& p,
                                  const VectorXd& x0, double eps,
                                  const VectorXd& y, int starts,
                                  std::uint64_t seed,
                                  const VectorXd& warm_start) {
  if (y.size() != p.m()) throw DimensionMismatch("perturbation dimension");
  ValueFunctionSample out;
  out.y = y;
  SolveOptions opt;
  opt.starts = starts;
  opt.seed = seed;
  opt.check_regularity = false;
  opt.check_feasible_x0 = false;
  opt.warm_start = warm_start;
  try {
    const LocalizedSolution s = SolveLocalization(p.Perturbed(y), x0, eps, opt);
    out.v_of_y = s.value;
    out.feasible = true;
    out.x = s.x_eps;
  } catch (const Infeasible&) {
    out.feasible = false;
  }
  return out;
}

CheckResult SubgradientCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             double radius_y, int samples, std::uint64_t seed,
                             double tol,
                             std::vector<ValueFunctionSample>* trace) {
  RequireMultiplier(p, sol);
  const Ball ys(VectorXd::Zero(p.m()), radius_y, NormSpace::Euclidean(p.m()));
  const Rng root(seed);
  CheckResult result;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    const VectorXd y = SampleBall(ys, rng, 0.3);
    const ValueFunctionSample v =
        ValueFunction(p, x0, eps, y, 2, rng.Child(1).seed(), sol.x_eps);
    if (trace) trace->push_back(v);
    if (!v.feasible) continue;
    ++result.samples;
    const double slack = v.v_of_y - sol.value - sol.lambda.dot(y);
    result.worst_slack = std::min(result.worst_slack, slack);
    if (slack < -tol) {
      result.passed = false;
      result.witness = y;
      result.detail = "v(y) - v(0) < <lambda_eps, y>";
      return result;
    }
  }
  return result;
}

CalmnessResult CalmnessCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             double r, int samples, std::uint64_t seed,
                             bool orthogonal_to_lambda) {
  RequireMultiplier(p, sol);
  CalmnessResult out;
  out.required =
      (orthogonal_to_lambda ? 0.0 : -sol.lambda.norm()) - 1e-4;
  const Ball ys(VectorXd::Zero(p.m()), r, NormSpace::Euclidean(p.m()));
  const Ball near(sol.x_eps, r, p.space);
  const double lnorm2 = sol.lambda.squaredNorm();
  const Rng root(seed);
  auto record = [&](double q, const VectorXd& y, const VectorXd& x) {
    if (q < out.quotient_lower_bound) {
      out.quotient_lower_bound = q;
      out.worst_y = y;
      out.worst_x = x;
    }
  };
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.Child(k);
    VectorXd y = SampleBall(ys, rng, 0.3);
    if (orthogonal_to_lambda && lnorm2 > 0.0) {
      y -= (sol.lambda.dot(y) / lnorm2) * sol.lambda;
    }
    if (y.norm() >= 1e-8) {
      const ValueFunctionSample v =
          ValueFunction(p, x0, eps, y, 2, rng.Child(1).seed(), sol.x_eps);
      if (v.feasible && p.space.norm(v.x - sol.x_eps) <= r) {
        ++out.y_samples;
        record((v.v_of_y - sol.value) / y.norm(), y, v.x);
      }
    }
    if (orthogonal_to_lambda) continue;
    const VectorXd x = SampleBall(near, rng, 0.3);
    if (p.space.norm(x - x0) > eps) continue;
    const VectorXd gx = p.constraint.Evaluate(x);
    const VectorXd ystar = p.cone.Project(gx) - gx;
    const double yn = ystar.norm();
    if (yn < 1e-8 || yn > r) continue;
    ++out.x_samples;
    record((p.Objective(x) - sol.value) / yn, ystar, x);
  }
  out.passed = out.quotient_lower_bound >= out.required;
  return out;
}

}  // namespace hconv
