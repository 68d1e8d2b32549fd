#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hconv/common.hpp"
#include "hconv/cone.hpp"
#include "hconv/norm_space.hpp"
#include "hconv/poly_map.hpp"

namespace hconv {

/// min phi(x) subject to g(x) in C, over x in a p-norm space. Constraint
/// values and multipliers carry the Euclidean norm.
struct ConstrainedProblem {
  PolyMap objective;   // n -> 1
  PolyMap constraint;  // n -> m
  ConeSpec cone;       // in R^m
  NormSpace space;     // R^n

  ConstrainedProblem(PolyMap phi, PolyMap g, ConeSpec c, NormSpace s);

  int n() const { return space.dim(); }
  int m() const { return cone.dim(); }
  double Objective(const VectorXd& x) const { return objective.Evaluate(x)[0]; }
  /// |g(x) - P_C(g(x))|_2.
  double FeasibilityResidual(const VectorXd& x) const;
  bool Feasible(const VectorXd& x, double tol = 1e-8) const {
    return FeasibilityResidual(x) <= tol;
  }
  /// L(lambda, x) = phi(x) + <lambda, g(x)>.
  double Lagrangian(const VectorXd& lambda, const VectorXd& x) const;
  /// The same problem with constraint g(x) + y in C.
  ConstrainedProblem Perturbed(const VectorXd& y) const;
};

/// (phi(x) - phi(x0), g(x)).
std::pair<double, VectorXd> ImageMap(const ConstrainedProblem& p,
                                     const VectorXd& x0, const VectorXd& x);

/// False when a feasible x in B(x0, eps) with phi(x) < phi(x0) - 1e-10 is
/// found among the samples; true otherwise (vacuously for eps = 0).
bool LocalOptimalityProbe(const ConstrainedProblem& p, const VectorXd& x0,
                          double eps, int samples, std::uint64_t seed);

struct SolveDiagnostics {
  double feasibility_residual = 0.0;
  double stationarity_residual = kInfinity;
  int starts = 0;
  int polished_starts = 0;
  // Multiplier bookkeeping.
  std::string multiplier_method;
  double least_squares_residual = kInfinity;
  double least_squares_slack = -kInfinity;
  double separation_slack = -kInfinity;
  // Separation offset alpha at rho = 1.
  double separation_alpha = 0.0;
  bool multiplier_discrepancy = false;
  std::vector<std::string> notes;
};

/// Solution of the eps-localization min phi over g^-1(C) and B(x0, eps).
struct LocalizedSolution {
  VectorXd x_eps;
  double value = 0.0;
  VectorXd lambda;     // in C-, empty until ComputeMultiplier
  double nu = 0.0;     // multiplier of the ball constraint
  double boundary_gap = 0.0;
  SolveDiagnostics diagnostics;
};

struct SolveOptions {
  // Random starts in addition to x0 (and the warm start, when given).
  int starts = 16;
  std::uint64_t seed = 42;
  // Require Df(phi, g)(x0) to be onto.
  bool check_regularity = true;
  // Require g(x0) in C.
  bool check_feasible_x0 = true;
  VectorXd warm_start;
};

/// Multi-start quadratic-penalty descent (penalty x10 over 12 rounds,
/// BFGS inner solves) followed by an active-set Newton polish of the KKT
/// system, keeping the best feasible point; ties go to the
/// lexicographically lowest x. Throws EpsilonNonpositive, Infeasible
/// (x0 infeasible or no feasible point found) and NotRegular.
LocalizedSolution SolveLocalization(const ConstrainedProblem& p,
                                    const VectorXd& x0, double eps,
                                    const SolveOptions& options = {});

/// Fills lambda and nu. Primary: least squares of the stationarity residual
/// |grad phi + Jg^T lambda + nu d| over lambda in C- with lambda_i = 0 on
/// inactive coordinates and nu >= 0 (d the outward ball normal). Fallback:
/// sampled separation of the image of the ball from Q with rho = 1. Both
/// are computed and a Lagrangian-slack disagreement above 1e-3 is flagged.
/// Throws MultiplierNotFound when neither reaches residual 1e-4.
LocalizedSolution ComputeMultiplier(const ConstrainedProblem& p,
                                    const VectorXd& x0, double eps,
                                    const LocalizedSolution& sol,
                                    std::uint64_t seed, int samples = 2000);

/// L(lambda, x) >= L(lambda, x_eps) - tol for sampled x in the ball.
CheckResult CheckLagrangianMin(const ConstrainedProblem& p, const VectorXd& x0,
                               double eps, const LocalizedSolution& sol,
                               int samples, std::uint64_t seed,
                               double tol = 1e-8);

/// Verifies lambda_eps in C- and <lambda_eps, g(x_eps)> = 0, then
/// L(lambda, x_eps) <= L(lambda_eps, x_eps) + tol for sampled lambda in C-
/// (generator combinations of magnitude up to 10) and
/// L(lambda_eps, x_eps) <= L(lambda_eps, x) + tol for sampled x in the
/// ball. `samples` of each kind.
CheckResult SaddlePointCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             int samples, std::uint64_t seed,
                             double tol = 1e-8);

struct DualityGap {
  double primal = 0.0;
  double dual = -kInfinity;
  double gap = kInfinity;
  VectorXd best_lambda;
  int lambdas = 0;
};

/// primal - max over sampled lambda in C- of min over the ball of
/// L(lambda, .). lambda_eps and 0 are always among the samples; the inner
/// minimum is taken over multi-start local minimisers and x_eps.
DualityGap DualityGapEstimate(const ConstrainedProblem& p, const VectorXd& x0,
                              double eps, const LocalizedSolution& sol,
                              int lambda_grid, std::uint64_t seed);

struct ValueFunctionSample {
  VectorXd y;
  double v_of_y = kInfinity;
  bool feasible = false;
  VectorXd x;
};

/// v(y) = min phi over {g(x) + y in C} and B(x0, eps). `warm_start` (may be
/// empty) seeds the multi-start.
ValueFunctionSample ValueFunction(const ConstrainedProblem& p,
                                  const VectorXd& x0, double eps,
                                  const VectorXd& y, int starts,
                                  std::uint64_t seed,
                                  const VectorXd& warm_start = VectorXd());

/// v(y) - v(0) >= <lambda_eps, y> - tol for sampled feasible y with
/// |y| <= radius_y. Infeasible perturbations are skipped. The witness is
/// the offending y.
CheckResult SubgradientCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             double radius_y, int samples, std::uint64_t seed,
                             double tol = 1e-6,
                             std::vector<ValueFunctionSample>* trace = nullptr);

struct CalmnessResult {
  double quotient_lower_bound = kInfinity;
  double required = 0.0;  // -|lambda_eps| - 1e-4
  bool passed = true;
  int y_samples = 0;
  int x_samples = 0;
  VectorXd worst_y;
  VectorXd worst_x;
};

/// Smallest sampled (phi(x) - phi(x_eps)) / |y| over y in rB \ {0} and
/// x in R(y), B(x0, eps) and B(x_eps, r). Two samplers: perturbations y with
/// the perturbed minimiser, and points x with their smallest admissible
/// perturbation P_C(g(x)) - g(x). With `orthogonal_to_lambda` only y with
/// <lambda_eps, y> = 0 are used and the bound required is -1e-4.
CalmnessResult CalmnessCheck(const ConstrainedProblem& p, const VectorXd& x0,
                             double eps, const LocalizedSolution& sol,
                             double r, int samples, std::uint64_t seed,
                             bool orthogonal_to_lambda = false);

}  // namespace hconv
