#pragma once

#include "sparselab/dictionary.hpp"
#include "sparselab/lp.hpp"

#include <Eigen/Dense>
#include <string>

namespace sparselab {

struct SelectorResult {
  Eigen::VectorXd lambda_hat;
  bool feasible = false; // whether the constraint set was nonempty
  Eigen::VectorXd residual_correlations; // n^{-1} sum (f_hat - Y) h_k
  double l1_norm = 0.0;
  std::string solver; // "lp-optimal" or "infeasible-default-zero"
  double duality_gap = 0.0;
};

// The l1-minimal vector with all empirical residual correlations within
// epsilon; an empty constraint set yields lambda_hat = 0 with a flag.
SelectorResult dantzig_select(const Eigen::MatrixXd& H,
                              const Eigen::VectorXd& Y, double epsilon);

struct FeasibilityResult {
  bool feasible = false;
  double max_correlation = 0.0;
};
FeasibilityResult feasibility_check(const Eigen::VectorXd& lambda,
                                    const Eigen::MatrixXd& H,
                                    const Eigen::VectorXd& Y, double epsilon);

struct LassoResult {
  Eigen::VectorXd lambda;
  bool converged = false;
  int sweeps = 0;
};

// Cyclic coordinate descent on n^{-1}||H lambda - Y||^2 + 2 eps ||lambda||_1.
LassoResult lasso_cd(const Eigen::MatrixXd& H, const Eigen::VectorXd& Y,
                     double epsilon, int max_iters = 100000,
                     double tol = 1e-8);

enum class NormSource { population, empirical };

struct EpsilonRule {
  enum class Mode { explicit_value, calibrated };
  Mode mode = Mode::calibrated;
  double value = 0.0; // explicit mode
  double C = 2.0;
  double A = 1.0;
  double sigma = 0.0;
  NormSource norm_source = NormSource::population;
};

// epsilon = C sigma max_k ||h_k|| sqrt(A log N / n); requires A log N <= n.
double epsilon_calibrate(const EpsilonRule& rule, double max_hk_norm, int N,
                         int n);
double max_hk_norm_population(const DictionaryModel& model);
double max_hk_norm_empirical(const Eigen::MatrixXd& H);

// The n -> infinity selector for dictionaries orthogonal in L2(Pi):
// componentwise shrinkage by epsilon / ||h_k||^2.
Eigen::VectorXd orthogonal_limit_selector(const Eigen::VectorXd& lambda_star,
                                          double epsilon,
                                          const Eigen::VectorXd& norms_sq);

// || limit selector - lambda_star ||_{l2} in closed form.
double limit_error_l2(const Eigen::VectorXd& lambda_star, double epsilon,
                      const Eigen::VectorXd& norms_sq);

} // namespace sparselab
