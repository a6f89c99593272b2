#pragma once

#include "sparselab/dictionary.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparselab {

// Sorted set of 0-based dictionary indices.
using IndexSet = std::vector<int>;

// Geometry values that may legitimately be infinite (degenerate Gram) or
// undefined (a bound whose precondition fails). Both are results, not
// errors: the grouped dictionary is designed to produce them.
struct BoundValue {
  enum class Tag { finite, unbounded, inapplicable };
  Tag tag = Tag::finite;
  double value = 0.0;

  static BoundValue finite(double v) { return {Tag::finite, v}; }
  static BoundValue unbounded() { return {Tag::unbounded, 0.0}; }
  static BoundValue inapplicable() { return {Tag::inapplicable, 0.0}; }

  bool is_finite() const { return tag == Tag::finite; }
  bool is_unbounded() const { return tag == Tag::unbounded; }
  std::string str() const;
};

// Thrown when a subset enumeration would exceed the combinatorial budget.
struct BudgetError : std::runtime_error {
  std::uint64_t required;
  std::uint64_t budget;
  BudgetError(std::uint64_t req, std::uint64_t bud);
};

constexpr std::uint64_t kEnumBudget = 2000000;

// Greedy magnitude decomposition of u into blocks of size d outside J
// (largest |u_j| first, ties broken by lowest index). Blocks cover exactly
// supp(u) \ J; sum of blocks plus the J-part reconstructs u.
struct ConeBlocks {
  std::vector<IndexSet> sets;           // J0 = J, then J1, J2, ...
  std::vector<Eigen::VectorXd> vectors; // full-length restrictions u^(k)
};

bool in_cone(const Eigen::VectorXd& u, const IndexSet& J);
ConeBlocks block_decompose(const Eigen::VectorXd& u, const IndexSet& J, int d);

// Smallest eigenvalue of the J x J principal Gram submatrix, floored at 0.
double kappa(const IndexSet& J, const Eigen::MatrixXd& gram);

// Largest canonical correlation between span{h_i : i in I} and
// span{h_j : j in J}; pseudo-inverse whitening on rank-deficient blocks.
double cross_correlation(const IndexSet& I, const IndexSet& J,
                         const Eigen::MatrixXd& gram);
double rho_complement(const IndexSet& J, const Eigen::MatrixXd& gram);

// Extremes of ||f_u||_{L2} over unit d-sparse u, by exhaustive subset
// enumeration (exact); throws BudgetError past kEnumBudget.
struct MdPair {
  double m;
  double M;
};
MdPair md_Md(int d, const Eigen::MatrixXd& gram);
double delta_d(int d, const Eigen::MatrixXd& gram);

// Max cross_correlation over disjoint I (size 2d) and J (size d).
double rho_d(int d, const Eigen::MatrixXd& gram);

// The three upper bounds on beta2(J).
BoundValue beta2_bound_kappa_rho(const IndexSet& J, const Eigen::MatrixXd& gram);
BoundValue beta2_bound_lemma2(const IndexSet& J, const Eigen::MatrixXd& gram);
BoundValue beta2_bound_prop3(const IndexSet& J, int s,
                             const Eigen::MatrixXd& gram);

struct AscentOptions {
  int starts = 64;
  int iters = 500;
  double step = 1e-2;
  int cone_samples = 100000;
};

// Certified lower estimate of beta2(J) = sup over the cone C_J of
// sqrt(sum_{j in J} u_j^2) / ||f_u||_{L2}; reports unbounded when an
// explicit cancellation direction is found.
BoundValue beta2_estimate(const IndexSet& J, const Eigen::MatrixXd& gram,
                          const AscentOptions& opts = {},
                          std::uint64_t seed = 17);

// Lower estimate of beta(J) = sup over C_J of sum_{j in J}|u_j| / L1(f_u).
BoundValue beta_estimate(const IndexSet& J, const DictionaryModel& model,
                         const AscentOptions& opts = {},
                         std::uint64_t seed = 17);

// Bound (2.3)-style product B * beta2 * sqrt(d(J)).
double beta_bound_product(const IndexSet& J, double B, double beta2);

// Effective dimension B^2 d(J) / (kappa (1 - rho^2)).
BoundValue d_tilde(const IndexSet& J, double B, const Eigen::MatrixXd& gram);

// L1->L2 comparison constant on the model: sqrt(pi/2) exactly for Gaussian
// feature laws, a cone-sampled estimate for the Rademacher kind.
double comparison_constant(const DictionaryModel& model,
                           std::uint64_t seed = 23);

// Everything the `diagnose` command reports for one (gram, J) pair.
struct GeometryReport {
  IndexSet J;
  double kappa = 0.0;
  double rho = 0.0;
  BoundValue beta2_est;
  BoundValue beta2_bound_kr;
  BoundValue beta2_bound_lem2;
  BoundValue beta2_bound_p3; // best over s
  int beta2_bound_p3_s = 0;  // s attaining it (0 when inapplicable)
  BoundValue beta_est;
  BoundValue beta_bound; // B * beta2_bound * sqrt(d)
  double B = 0.0;
  BoundValue dtilde;
  std::vector<double> m, M, delta, rho_sparse; // indexed by d = 1..d_max
  std::vector<double> rho_delta_diag;          // the delta_{3d}-based bound
};

GeometryReport diagnose(const Eigen::MatrixXd& gram, const IndexSet& J,
                        int d_max, double B, const AscentOptions& opts = {},
                        std::uint64_t seed = 17);

std::uint64_t binomial(int n, int k);

} // namespace sparselab
