#pragma once

#include <cstdint>
#include <functional>

#include "hconv/common.hpp"
#include "hconv/poly_map.hpp"
#include "hconv/random.hpp"

namespace hconv {

struct GaussNewtonOptions {
  int max_iterations = 100;
  // Convergence threshold on the Euclidean residual |f(x) - target|.
  double residual_tol = 1e-10;
  // Singular values below this are treated as zero in the pseudo-inverse.
  double rank_tol = 1e-12;
};

struct PreimageResult {
  VectorXd x;
  double residual = kInfinity;
  int iterations = 0;
  bool converged = false;
};

/// Solves f(x) = target from `start` with least-norm Gauss-Newton steps
/// x <- x - t J^+ (f(x) - target), halving t whenever the residual grows.
PreimageResult SolvePreimage(const PolyMap& f, const VectorXd& target,
                             const VectorXd& start,
                             const GaussNewtonOptions& options = {});

/// Runs SolvePreimage from `start` and from `restarts` Gaussian
/// perturbations of it (standard deviation `spread`). Among converged runs,
/// returns the one minimising `score` (lower is better); otherwise the run
/// with the smallest residual.
PreimageResult MultiStartPreimage(
    const PolyMap& f, const VectorXd& target, const VectorXd& start,
    double spread, Rng& rng, int restarts,
    const std::function<double(const VectorXd&)>& score,
    const GaussNewtonOptions& options = {});

}  // namespace hconv
