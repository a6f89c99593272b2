#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sparselab {

// Generative model of the feature vector (h_1(X), ..., h_N(X)) together
// with its exact population Gram matrix <h_i, h_j>_{L2}.
enum class DictKind { gaussian, rademacher, orthogonal_scaled, grouped };

struct DictionaryModel {
  DictKind kind = DictKind::gaussian;
  int n_funcs = 0;
  Eigen::MatrixXd gram; // N x N population Gram matrix

  // kind-specific parameters
  Eigen::MatrixXd covariance;           // gaussian: feature covariance
  Eigen::VectorXd taus;                 // orthogonal_scaled: per-function scale
  std::vector<std::vector<int>> blocks; // grouped: 0-based disjoint blocks

  // 0-based block id per function (grouped kind only).
  std::vector<int> block_of;
};

struct DesignSample {
  int n = 0;
  Eigen::MatrixXd H; // n x N, H(i, k) = h_k(X_i)
  std::uint64_t seed = 0;
};

struct ResponseSample {
  Eigen::VectorXd y;
  Eigen::VectorXd lambda_star; // coefficient part of the target
  double sigma = 0.0;          // noise standard deviation
  double gamma = 0.0;          // magnitude of the off-span component
  std::uint64_t seed = 0;
};

// Constructors validate their inputs and throw std::invalid_argument on
// degenerate dictionaries (N < 2, zero-variance functions, non-PSD
// covariance, broken partitions).
DictionaryModel make_gaussian(const Eigen::MatrixXd& covariance);
DictionaryModel make_rademacher(int n_funcs);
DictionaryModel make_orthogonal_scaled(const Eigen::VectorXd& taus);
DictionaryModel make_grouped(const std::vector<std::vector<int>>& blocks);

DesignSample sample_design(const DictionaryModel& model, int n,
                           std::uint64_t seed);

// y_j = sum_k lambda_star_k H(j,k) + gamma * phi_j + xi_j with phi_j, xi_j
// independent, phi_j ~ N(0,1) and xi_j ~ N(0, sigma^2).
ResponseSample sample_response(const DesignSample& design,
                               const Eigen::VectorXd& lambda_star,
                               double sigma, double gamma, std::uint64_t seed);

// || f_lambda ||_{L2(Pi)} = sqrt(lambda' G lambda).
double population_l2_norm(const Eigen::VectorXd& lambda,
                          const Eigen::MatrixXd& gram);

// || f_lambda ||_{L1(Pi)}. Closed form sqrt(2/pi) * L2 for the kinds whose
// feature law makes f_lambda a centered Gaussian; Monte Carlo for the
// Rademacher kind (mc_samples >= 1000 required there).
double population_l1_norm(const Eigen::VectorXd& lambda,
                          const DictionaryModel& model,
                          int mc_samples = 100000, std::uint64_t seed = 7);

// True when f_lambda(X) is a centered Gaussian under the model's law.
bool has_gaussian_features(const DictionaryModel& model);

} // namespace sparselab
