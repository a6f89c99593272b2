#pragma once

#include "sparselab/dictionary.hpp"
#include "sparselab/geometry.hpp"

#include <Eigen/Dense>
#include <cstdint>

namespace sparselab {

// Lower estimates of the empirical-process suprema behind the deviation
// lemmas: vertex scans plus multi-start subgradient ascent. All three are
// deterministic in (model, n, seed) and report certified lower values of
// the true suprema.

// sup over ||u||_l1 <= 1 of |(Pi_n - Pi)(|f_u|)|.
double empproc_sup_l1ball(const DictionaryModel& model, int n, int restarts,
                          std::uint64_t seed);

// sup over ||u||_l1 <= 1 of |(Pi_n - Pi)(|f_u|^2)|.
double empproc_sup_l1ball_sq(const DictionaryModel& model, int n,
                             int restarts, std::uint64_t seed);

// sup over C_J intersected with the l2 ball of |(Pi_n - Pi)(|f_u|)|,
// probed with random d-sparse unit directions; 0 when J is empty.
double empproc_sup_cone(const DictionaryModel& model, int n,
                        const IndexSet& J, int d, int restarts,
                        std::uint64_t seed);

struct BernsteinCheck {
  double holds_rate = 0.0;   // fraction of reps within C * psi1 * rate
  double min_constant = 0.0; // smallest C covering every rep
};

// Checks max_k |n^{-1} sum_j h_k(X_j)| <= C ||h_k||_psi1 (sqrt(A log N / n)
// v A log N / n) over independent replications.
BernsteinCheck bernstein_max_check(const DictionaryModel& model, int n,
                                   double A, double C, int reps,
                                   std::uint64_t seed);

// Same check on precomputed per-coordinate means and psi1 norms (one rep).
bool bernstein_holds(const Eigen::VectorXd& means,
                     const Eigen::VectorXd& psi1_norms, int n, double A,
                     double C);

} // namespace sparselab
