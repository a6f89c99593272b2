#pragma once

#include <Eigen/Dense>

namespace sparselab {

enum class Psi { psi1, psi2 }; // e^|x| - 1 and e^{x^2} - 1

struct OrliczNorm {
  bool infinite = false;
  double value = 0.0;
};

// inf { C > 0 : E psi(|eta|/C) <= 1 } by bisection over the monotone map
// C -> E psi(|eta|/C), to relative tolerance rel_tol.
OrliczNorm orlicz_norm(const Eigen::VectorXd& sample, Psi psi,
                       double rel_tol = 1e-10);

// Closed-form laws: centered normal with standard deviation sigma, and
// exponential with the given rate (whose psi2 norm is infinite).
OrliczNorm orlicz_norm_normal(double sigma, Psi psi, double rel_tol = 1e-10);
OrliczNorm orlicz_norm_exponential(double rate, Psi psi,
                                   double rel_tol = 1e-10);

// ||eta1 eta2||_psi1 <= ||eta1||_psi2 ||eta2||_psi2.
double product_psi1_bound(double norm2_a, double norm2_b);

} // namespace sparselab
