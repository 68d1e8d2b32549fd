#include "hconv/gauss_newton.hpp"

namespace hconv {

namespace {

VectorXd LeastNormStep(const MatrixXd& jac, const VectorXd& residual,
                       double rank_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  VectorXd coeffs = svd.matrixU().transpose() * residual;
  const double cutoff = rank_tol * std::max(1.0, s.size() ? s[0] : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    coeffs[i] = s[i] > cutoff ? coeffs[i] / s[i] : 0.0;
  }
  return svd.matrixV() * coeffs;
}

}  // namespace

PreimageResult SolvePreimage(const PolyMap& f, const VectorXd& target,
                             const VectorXd& start,
                             const GaussNewtonOptions& options) {
  if (target.size() != f.n_out()) {
    throw DimensionMismatch("preimage target has wrong dimension");
  }
  PreimageResult out;
  out.x = start;
  VectorXd r = f.Evaluate(out.x) - target;
  out.residual = r.norm();
  for (int it = 0; it < options.max_iterations; ++it) {
    if (out.residual <= options.residual_tol) break;
    out.iterations = it + 1;
    const VectorXd step = LeastNormStep(f.Jacobian(out.x), r, options.rank_tol);
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      const VectorXd trial = out.x - t * step;
      const VectorXd r_trial = f.Evaluate(trial) - target;
      const double res = r_trial.norm();
      if (res < out.residual) {
        out.x = trial;
        r = r_trial;
        out.residual = res;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  out.converged = out.residual <= options.residual_tol;
  return out;
}

PreimageResult MultiStartPreimage(
    const PolyMap& f, const VectorXd& target, const VectorXd& start,
    double spread, Rng& rng, int restarts,
    const std::function<double(const VectorXd&)>& score,
    const GaussNewtonOptions& options) {
  PreimageResult best;
  double best_score = kInfinity;
  for (int k = 0; k <= restarts; ++k) {
    VectorXd x = start;
    if (k > 0) x += spread * rng.NormalVector(static_cast<int>(start.size()));
    PreimageResult run = SolvePreimage(f, target, x, options);
    if (run.converged) {
      const double s = score(run.x);
      if (!best.converged || s < best_score) {
        best = std::move(run);
        best_score = s;
      }
    } else if (!best.converged && run.residual < best.residual) {
      best = std::move(run);
    }
  }
  return best;
}

}  // namespace hconv
