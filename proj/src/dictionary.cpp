#include "sparselab/dictionary.hpp"

#include "sparselab/rng.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace sparselab {

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535588; // E|Z|, Z ~ N(0,1)

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
} // namespace

DictionaryModel make_gaussian(const Eigen::MatrixXd& covariance) {
  const int n = static_cast<int>(covariance.rows());
  require(n >= 2, "gaussian dictionary requires N >= 2");
  require(covariance.cols() == n, "covariance must be square");
  require(covariance.isApprox(covariance.transpose(), 1e-12),
          "covariance must be symmetric");
  for (int k = 0; k < n; ++k)
    require(covariance(k, k) > 0.0,
            "zero-variance dictionary function (degenerate covariance)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  require(es.eigenvalues().minCoeff() >= -1e-8, "covariance must be PSD");

  DictionaryModel m;
  m.kind = DictKind::gaussian;
  m.n_funcs = n;
  m.covariance = covariance;
  m.gram = covariance;
  return m;
}

DictionaryModel make_rademacher(int n_funcs) {
  require(n_funcs >= 2, "rademacher dictionary requires N >= 2");
  DictionaryModel m;
  m.kind = DictKind::rademacher;
  m.n_funcs = n_funcs;
  m.gram = Eigen::MatrixXd::Identity(n_funcs, n_funcs);
  return m;
}

DictionaryModel make_orthogonal_scaled(const Eigen::VectorXd& taus) {
  const int n = static_cast<int>(taus.size());
  require(n >= 2, "orthogonal_scaled dictionary requires N >= 2");
  for (int k = 0; k < n; ++k)
    require(taus[k] > 0.0, "scales must be positive");
  DictionaryModel m;
  m.kind = DictKind::orthogonal_scaled;
  m.n_funcs = n;
  m.taus = taus;
  m.gram = taus.array().square().matrix().asDiagonal();
  return m;
}

DictionaryModel make_grouped(const std::vector<std::vector<int>>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.size());
  require(n >= 2, "grouped dictionary requires N >= 2");

  std::vector<int> block_of(n, -1);
  for (int k = 0; k < static_cast<int>(blocks.size()); ++k) {
    require(!blocks[k].empty(), "empty block in partition");
    for (int j : blocks[k]) {
      require(j >= 0 && j < n, "partition index out of range");
      require(block_of[j] == -1, "overlapping partition blocks");
      block_of[j] = k;
    }
  }
  for (int j = 0; j < n; ++j)
    require(block_of[j] >= 0, "partition does not cover {1..N}");

  DictionaryModel m;
  m.kind = DictKind::grouped;
  m.n_funcs = n;
  m.blocks = blocks;
  m.block_of = block_of;
  m.gram = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (block_of[i] == block_of[j]) m.gram(i, j) = 1.0;
  return m;
}

DesignSample sample_design(const DictionaryModel& model, int n,
                           std::uint64_t seed) {
  require(n >= 1, "sample size must be positive");
  const int N = model.n_funcs;
  DesignSample d;
  d.n = n;
  d.seed = seed;
  d.H.resize(n, N);

  // Factor the Gaussian covariance once: C = L L' with L = V sqrt(D).
  Eigen::MatrixXd L;
  if (model.kind == DictKind::gaussian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.covariance);
    Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    L = es.eigenvectors() * clamped.asDiagonal();
  }

  const int n_latent =
      model.kind == DictKind::grouped ? static_cast<int>(model.blocks.size())
                                      : N;
  Eigen::VectorXd z(n_latent);
  for (int i = 0; i < n; ++i) {
    Rng row(derive_seed(seed, static_cast<std::uint64_t>(i)));
    switch (model.kind) {
      case DictKind::gaussian:
        for (int k = 0; k < N; ++k) z[k] = row.normal();
        d.H.row(i) = (L * z).transpose();
        break;
      case DictKind::rademacher:
        for (int k = 0; k < N; ++k) d.H(i, k) = row.rademacher();
        break;
      case DictKind::orthogonal_scaled:
        for (int k = 0; k < N; ++k) d.H(i, k) = model.taus[k] * row.normal();
        break;
      case DictKind::grouped:
        for (int k = 0; k < n_latent; ++k) z[k] = row.normal();
        for (int j = 0; j < N; ++j) d.H(i, j) = z[model.block_of[j]];
        break;
    }
  }
  return d;
}

ResponseSample sample_response(const DesignSample& design,
                               const Eigen::VectorXd& lambda_star,
                               double sigma, double gamma,
                               std::uint64_t seed) {
  require(lambda_star.size() == design.H.cols(),
          "lambda_star length must match the design width");
  require(sigma >= 0.0 && gamma >= 0.0, "sigma and gamma must be >= 0");
  ResponseSample r;
  r.lambda_star = lambda_star;
  r.sigma = sigma;
  r.gamma = gamma;
  r.seed = seed;
  r.y = design.H * lambda_star;
  if (sigma > 0.0 || gamma > 0.0) {
    for (int j = 0; j < design.n; ++j) {
      Rng row(derive_seed(seed, static_cast<std::uint64_t>(j)));
      const double phi = row.normal();
      const double xi = row.normal();
      r.y[j] += gamma * phi + sigma * xi;
    }
  }
  return r;
}

double population_l2_norm(const Eigen::VectorXd& lambda,
                          const Eigen::MatrixXd& gram) {
  require(lambda.size() == gram.rows(), "dimension mismatch");
  const double q = lambda.dot(gram * lambda);
  return std::sqrt(std::max(q, 0.0));
}

bool has_gaussian_features(const DictionaryModel& model) {
  return model.kind != DictKind::rademacher;
}

double population_l1_norm(const Eigen::VectorXd& lambda,
                          const DictionaryModel& model, int mc_samples,
                          std::uint64_t seed) {
  require(lambda.size() == model.n_funcs, "dimension mismatch");
  if (has_gaussian_features(model))
    return kSqrt2OverPi * population_l2_norm(lambda, model.gram);

  require(mc_samples >= 1000, "Monte Carlo L1 norm needs mc_samples >= 1000");
  Rng rng(derive_seed(seed, 0xab5ULL));
  double acc = 0.0;
  for (int s = 0; s < mc_samples; ++s) {
    double f = 0.0;
    for (int k = 0; k < model.n_funcs; ++k) f += lambda[k] * rng.rademacher();
    acc += std::abs(f);
  }
  return acc / mc_samples;
}

} // namespace sparselab
