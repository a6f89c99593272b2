#include "sparselab/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace sparselab {

SelectorResult dantzig_select(const Eigen::MatrixXd& H,
                              const Eigen::VectorXd& Y, double epsilon) {
  const int n = static_cast<int>(H.rows());
  const int N = static_cast<int>(H.cols());
  if (Y.size() != n) throw std::invalid_argument("H and Y sizes differ");

  const LPProblem lp = build_dantzig_lp(H, Y, epsilon);
  const LPSolution s = solve_lp(lp);

  SelectorResult r;
  if (s.status == LPStatus::optimal) {
    r.lambda_hat = s.primal.head(N);
    r.feasible = true;
    r.solver = "lp-optimal";
    r.duality_gap = s.duality_gap;
  } else {
    // Empty constraint set: the conventional fallback is lambda = 0.
    r.lambda_hat = Eigen::VectorXd::Zero(N);
    r.feasible = false;
    r.solver = "infeasible-default-zero";
    r.duality_gap = 0.0;
  }
  r.residual_correlations =
      H.transpose() * (H * r.lambda_hat - Y) / double(n);
  r.l1_norm = r.lambda_hat.lpNorm<1>();
  return r;
}

FeasibilityResult feasibility_check(const Eigen::VectorXd& lambda,
                                    const Eigen::MatrixXd& H,
                                    const Eigen::VectorXd& Y,
                                    double epsilon) {
  const double n = static_cast<double>(H.rows());
  const Eigen::VectorXd corr = H.transpose() * (H * lambda - Y) / n;
  FeasibilityResult r;
  r.max_correlation = corr.size() > 0 ? corr.cwiseAbs().maxCoeff() : 0.0;
  r.feasible = r.max_correlation <= epsilon;
  return r;
}

LassoResult lasso_cd(const Eigen::MatrixXd& H, const Eigen::VectorXd& Y,
                     double epsilon, int max_iters, double tol) {
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
  const int n = static_cast<int>(H.rows());
  const int N = static_cast<int>(H.cols());
  const Eigen::MatrixXd G = H.transpose() * H / double(n);
  const Eigen::VectorXd z = H.transpose() * Y / double(n);

  LassoResult res;
  res.lambda.setZero(N);
  Eigen::VectorXd Gl = Eigen::VectorXd::Zero(N); // G * lambda, kept in sync
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    double max_change = 0.0;
    for (int k = 0; k < N; ++k) {
      if (G(k, k) <= 0.0) continue; // empirically null column
      const double rho = z[k] - (Gl[k] - G(k, k) * res.lambda[k]);
      const double soft =
          std::copysign(std::max(std::abs(rho) - epsilon, 0.0), rho);
      const double next = soft / G(k, k);
      const double change = next - res.lambda[k];
      if (change != 0.0) {
        Gl += G.col(k) * change;
        res.lambda[k] = next;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    res.sweeps = sweep + 1;
    if (max_change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double epsilon_calibrate(const EpsilonRule& rule, double max_hk_norm, int N,
                         int n) {
  if (rule.mode == EpsilonRule::Mode::explicit_value) {
    if (rule.value < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    return rule.value;
  }
  if (N < 2 || n < 1) throw std::invalid_argument("need N >= 2 and n >= 1");
  if (rule.A < 1.0) throw std::invalid_argument("confidence exponent A >= 1");
  const double logN = std::log(static_cast<double>(N));
  if (rule.A * logN > static_cast<double>(n))
    throw std::invalid_argument("calibration requires A log N <= n");
  return rule.C * rule.sigma * max_hk_norm *
         std::sqrt(rule.A * logN / static_cast<double>(n));
}

double max_hk_norm_population(const DictionaryModel& model) {
  return std::sqrt(model.gram.diagonal().maxCoeff());
}

double max_hk_norm_empirical(const Eigen::MatrixXd& H) {
  const double n = static_cast<double>(H.rows());
  return std::sqrt(H.colwise().squaredNorm().maxCoeff() / n);
}

Eigen::VectorXd orthogonal_limit_selector(const Eigen::VectorXd& lambda_star,
                                          double epsilon,
                                          const Eigen::VectorXd& norms_sq) {
  const int N = static_cast<int>(lambda_star.size());
  if (norms_sq.size() != N) throw std::invalid_argument("length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < N; ++k) {
    if (norms_sq[k] <= 0.0)
      throw std::invalid_argument("norms_sq entries must be positive");
    const double t = epsilon / norms_sq[k];
    if (lambda_star[k] >= t)
      out[k] = lambda_star[k] - t;
    else if (lambda_star[k] <= -t)
      out[k] = lambda_star[k] + t;
  }
  return out;
}

double limit_error_l2(const Eigen::VectorXd& lambda_star, double epsilon,
                      const Eigen::VectorXd& norms_sq) {
  const int N = static_cast<int>(lambda_star.size());
  if (norms_sq.size() != N) throw std::invalid_argument("length mismatch");
  double acc = 0.0;
  for (int k = 0; k < N; ++k) {
    if (norms_sq[k] <= 0.0)
      throw std::invalid_argument("norms_sq entries must be positive");
    const double t = epsilon / norms_sq[k];
    if (std::abs(lambda_star[k]) >= t)
      acc += epsilon * epsilon / (norms_sq[k] * norms_sq[k]);
    else
      acc += lambda_star[k] * lambda_star[k];
  }
  return std::sqrt(acc);
}

} // namespace sparselab
