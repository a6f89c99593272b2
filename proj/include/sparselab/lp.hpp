#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sparselab {

enum class Relation { le, eq };

struct LPConstraint {
  Eigen::VectorXd coeffs;
  Relation rel = Relation::le;
  double rhs = 0.0;
};

struct LPProblem {
  Eigen::VectorXd objective;       // minimized
  std::vector<LPConstraint> rows;
  Eigen::VectorXd lower, upper;    // per-variable bounds, +-inf allowed
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
  LPStatus status = LPStatus::optimal;
  Eigen::VectorXd primal; // structural variables
  Eigen::VectorXd dual;   // one multiplier per row
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // infeasible: Farkas row multipliers; unbounded: improving direction.
  Eigen::VectorXd ray;
};

// Dense bounded-variable revised simplex. Pricing starts with the largest
// reduced cost and switches permanently to Bland's rule when the objective
// stalls, which keeps solves fast and guarantees termination. Identical
// problems produce identical solutions bit for bit.
LPSolution solve_lp(const LPProblem& problem);

// The selector's LP exactly as displayed: variables (lambda, u), objective
// sum u_j, cone rows +-lambda_k - u_k <= 0 and correlation rows
// -eps <= (G_n lambda)_k - z_k <= eps with G_n = H'H/n, z = H'Y/n.
LPProblem build_dantzig_lp(const Eigen::MatrixXd& H, const Eigen::VectorXd& Y,
                           double epsilon);

// Plain-text fixed-layout dump for reproducing solver issues.
std::string dump_lp(const LPProblem& problem);

} // namespace sparselab
