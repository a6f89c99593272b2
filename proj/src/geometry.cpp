#include "sparselab/geometry.hpp"

#include "sparselab/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sparselab {

namespace {

constexpr double kEigFloor = 1e-10; // round-off negatives count as 0
constexpr double kSqrt2OverPi = 0.79788456080286535588;

std::vector<bool> member_mask(const IndexSet& J, int n) {
  std::vector<bool> mask(n, false);
  for (int j : J) {
    if (j < 0 || j >= n) throw std::invalid_argument("index set out of range");
    mask[j] = true;
  }
  return mask;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& G, const IndexSet& rows,
                          const IndexSet& cols) {
  Eigen::MatrixXd S(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      S(i, j) = G(rows[i], cols[j]);
  return S;
}

// Pseudo-inverse square root used to whiten a span's Gram block; columns
// with eigenvalue <= rank_tol * max are dropped (rank-deficient spans are
// reduced, not rejected).
Eigen::MatrixXd whitener(const Eigen::MatrixXd& block) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = std::max(ev.maxCoeff(), 0.0) * 1e-12 + 1e-300;
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > cut) keep.push_back(i);
  Eigen::MatrixXd W(block.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    W.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(ev[keep[c]]);
  return W;
}

bool is_diagonal(const Eigen::MatrixXd& G) {
  for (int i = 0; i < G.rows(); ++i)
    for (int j = 0; j < G.cols(); ++j)
      if (i != j && G(i, j) != 0.0) return false;
  return true;
}

// Detects the exact block-of-ones pattern of the grouped dictionary;
// returns block sizes or an empty vector when the pattern does not match.
std::vector<int> ones_blocks(const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  std::vector<int> block(n, -1);
  int n_blocks = 0;
  for (int i = 0; i < n; ++i) {
    if (G(i, i) != 1.0) return {};
    if (block[i] == -1) block[i] = n_blocks++;
    for (int j = 0; j < n; ++j) {
      const double g = G(i, j);
      if (g != 0.0 && g != 1.0) return {};
      if (g == 1.0 && j > i) {
        if (block[j] != -1 && block[j] != block[i]) return {};
        block[j] = block[i];
      }
    }
  }
  std::vector<int> sizes(n_blocks, 0);
  for (int i = 0; i < n; ++i) sizes[block[i]]++;
  // verify transitivity: entries must be 1 exactly within a block
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((block[i] == block[j]) != (G(i, j) == 1.0)) return {};
  return sizes;
}

template <typename F>
void for_each_subset(int n, int k, F&& f) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double sum_abs_on(const Eigen::VectorXd& u, const std::vector<bool>& mask,
                  bool in) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i)
    if (mask[i] == in) s += std::abs(u[i]);
  return s;
}

} // namespace

std::string BoundValue::str() const {
  switch (tag) {
    case Tag::finite: return std::to_string(value);
    case Tag::unbounded: return "unbounded";
    default: return "inapplicable";
  }
}

BudgetError::BudgetError(std::uint64_t req, std::uint64_t bud)
    : std::runtime_error("subset enumeration budget exceeded: needs " +
                         std::to_string(req) + " > " + std::to_string(bud)),
      required(req), budget(bud) {}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > static_cast<unsigned __int128>(1) << 62)
      return static_cast<std::uint64_t>(1) << 62;
  }
  return static_cast<std::uint64_t>(r);
}

bool in_cone(const Eigen::VectorXd& u, const IndexSet& J) {
  const auto mask = member_mask(J, static_cast<int>(u.size()));
  return sum_abs_on(u, mask, false) <= sum_abs_on(u, mask, true);
}

ConeBlocks block_decompose(const Eigen::VectorXd& u, const IndexSet& J,
                           int d) {
  if (d < 1) throw std::invalid_argument("block size d must be >= 1");
  const int n = static_cast<int>(u.size());
  const auto mask = member_mask(J, n);

  ConeBlocks out;
  out.sets.push_back(J);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
  for (int j : J) u0[j] = u[j];
  out.vectors.push_back(u0);

  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!mask[i] && u[i] != 0.0) rest.push_back(i);
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
    return std::abs(u[a]) > std::abs(u[b]);
  });

  for (std::size_t pos = 0; pos < rest.size(); pos += d) {
    IndexSet Jk(rest.begin() + pos,
                rest.begin() + std::min(pos + d, rest.size()));
    std::sort(Jk.begin(), Jk.end());
    Eigen::VectorXd uk = Eigen::VectorXd::Zero(n);
    for (int j : Jk) uk[j] = u[j];
    out.sets.push_back(std::move(Jk));
    out.vectors.push_back(std::move(uk));
  }
  return out;
}

double kappa(const IndexSet& J, const Eigen::MatrixXd& gram) {
  if (J.empty()) throw std::invalid_argument("kappa needs a nonempty J");
  member_mask(J, static_cast<int>(gram.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(submatrix(gram, J, J));
  return std::max(es.eigenvalues().minCoeff(), 0.0);
}

double cross_correlation(const IndexSet& I, const IndexSet& J,
                         const Eigen::MatrixXd& gram) {
  if (I.empty() || J.empty())
    throw std::invalid_argument("cross_correlation needs nonempty sets");
  const auto mask = member_mask(I, static_cast<int>(gram.rows()));
  for (int j : J)
    if (mask[j]) throw std::invalid_argument("index sets must be disjoint");
  member_mask(J, static_cast<int>(gram.rows()));

  const Eigen::MatrixXd WI = whitener(submatrix(gram, I, I));
  const Eigen::MatrixXd WJ = whitener(submatrix(gram, J, J));
  if (WI.cols() == 0 || WJ.cols() == 0) return 0.0;
  const Eigen::MatrixXd M = WI.transpose() * submatrix(gram, I, J) * WJ;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0);
}

double rho_complement(const IndexSet& J, const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(gram.rows());
  const auto mask = member_mask(J, n);
  IndexSet comp;
  for (int i = 0; i < n; ++i)
    if (!mask[i]) comp.push_back(i);
  if (J.empty() || comp.empty()) return 0.0;
  return cross_correlation(J, comp, gram);
}

MdPair md_Md(int d, const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(gram.rows());
  if (d < 1 || d > n) throw std::invalid_argument("need 1 <= d <= N");

  if (is_diagonal(gram)) {
    const auto diag = gram.diagonal();
    return {std::sqrt(std::max(diag.minCoeff(), 0.0)),
            std::sqrt(std::max(diag.maxCoeff(), 0.0))};
  }
  if (const auto sizes = ones_blocks(gram); !sizes.empty()) {
    const int bmax = *std::max_element(sizes.begin(), sizes.end());
    const double m = (d >= 2 && bmax >= 2) ? 0.0 : 1.0;
    return {m, std::sqrt(static_cast<double>(std::min(d, bmax)))};
  }

  const std::uint64_t work = binomial(n, d);
  if (work > kEnumBudget) throw BudgetError(work, kEnumBudget);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for_each_subset(n, d, [&](const std::vector<int>& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        submatrix(gram, S, S), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  });
  return {std::sqrt(std::max(lo, 0.0)), std::sqrt(std::max(hi, 0.0))};
}

double delta_d(int d, const Eigen::MatrixXd& gram) {
  const MdPair p = md_Md(d, gram);
  return std::max(p.M - 1.0, 1.0 - p.m);
}

double rho_d(int d, const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(gram.rows());
  if (d < 1 || 3 * d > n) throw std::invalid_argument("rho_d needs 3d <= N");

  if (is_diagonal(gram)) return 0.0;
  if (const auto sizes = ones_blocks(gram); !sizes.empty()) {
    const int bmax = *std::max_element(sizes.begin(), sizes.end());
    return bmax >= 2 ? 1.0 : 0.0;
  }

  const std::uint64_t work = binomial(n, 2 * d) * binomial(n - 2 * d, d);
  if (work > kEnumBudget) throw BudgetError(work, kEnumBudget);

  double best = 0.0;
  for_each_subset(n, 2 * d, [&](const std::vector<int>& I) {
    std::vector<bool> used(n, false);
    for (int i : I) used[i] = true;
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
      if (!used[i]) rest.push_back(i);
    for_each_subset(static_cast<int>(rest.size()), d,
                    [&](const std::vector<int>& pick) {
                      IndexSet J(pick.size());
                      for (std::size_t t = 0; t < pick.size(); ++t)
                        J[t] = rest[pick[t]];
                      best = std::max(best, cross_correlation(I, J, gram));
                    });
  });
  return best;
}

BoundValue beta2_bound_kappa_rho(const IndexSet& J,
                                 const Eigen::MatrixXd& gram) {
  const double k = kappa(J, gram);
  const double r = rho_complement(J, gram);
  if (k <= kEigFloor || r >= 1.0 - 1e-12) return BoundValue::unbounded();
  return BoundValue::finite(1.0 / std::sqrt(k * (1.0 - r * r)));
}

BoundValue beta2_bound_lemma2(const IndexSet& J, const Eigen::MatrixXd& gram) {
  const int d = static_cast<int>(J.size());
  const int n = static_cast<int>(gram.rows());
  if (d == 0 || 3 * d > n || 2 * d > n) return BoundValue::inapplicable();
  const MdPair p = md_Md(2 * d, gram);
  const double rho = rho_d(d, gram);
  if (p.m <= kEigFloor || rho >= p.m / p.M) return BoundValue::inapplicable();
  return BoundValue::finite(1.0 / (p.m - rho * p.M));
}

BoundValue beta2_bound_prop3(const IndexSet& J, int s,
                             const Eigen::MatrixXd& gram) {
  const int d = static_cast<int>(J.size());
  const int n = static_cast<int>(gram.rows());
  if (d == 0 || s < 1 || d + s > n) return BoundValue::inapplicable();
  const double m_ds = md_Md(d + s, gram).m;
  const double M_s = md_Md(s, gram).M;
  if (m_ds <= kEigFloor || M_s / m_ds >= std::sqrt(double(s) / double(d)))
    return BoundValue::inapplicable();
  const double den = std::sqrt(double(s)) * m_ds - std::sqrt(double(d)) * M_s;
  return BoundValue::finite(std::sqrt(double(s)) / den);
}

namespace {

// Shared machinery for the cone-constrained ratio maximizations behind
// beta2_estimate and beta_estimate. `num` evaluates the numerator and its
// (sub)gradient; `den` the denominator norm. Both must be positively
// homogeneous of degree 1.
struct ConeAscent {
  const Eigen::MatrixXd& G;
  const IndexSet& J;
  std::vector<bool> mask;

  explicit ConeAscent(const Eigen::MatrixXd& g, const IndexSet& j)
      : G(g), J(j), mask(member_mask(j, static_cast<int>(g.rows()))) {}

  // Scales the off-J part down to the cone boundary when violated.
  void repair(Eigen::VectorXd& u) const {
    const double in = sum_abs_on(u, mask, true);
    const double out = sum_abs_on(u, mask, false);
    if (out <= in) return;
    if (in <= 0.0) {
      for (int i = 0; i < u.size(); ++i)
        if (!mask[i]) u[i] = 0.0;
      return;
    }
    const double t = in / out;
    for (int i = 0; i < u.size(); ++i)
      if (!mask[i]) u[i] *= t;
  }

  Eigen::VectorXd random_cone_point(Rng& rng) const {
    const int n = static_cast<int>(G.rows());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    double l1_in = 0.0;
    for (int j : J) {
      u[j] = rng.normal();
      l1_in += std::abs(u[j]);
    }
    Eigen::VectorXd off(n);
    double l1_out = 0.0;
    for (int i = 0; i < n; ++i) {
      off[i] = mask[i] ? 0.0 : rng.normal();
      l1_out += std::abs(off[i]);
    }
    if (l1_out > 0.0) u += off * (rng.uniform() * l1_in / l1_out);
    return u;
  }
};

struct RatioObjective {
  // value and gradient of numerator(u) / denominator(u)
  virtual double numerator(const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd num_grad(const Eigen::VectorXd& u) const = 0;
  virtual double denominator(const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd den_grad(const Eigen::VectorXd& u) const = 0;
  virtual ~RatioObjective() = default;
};

// Runs multi-start projected ascent of num/den over C_J; returns the best
// ratio found, or an unbounded flag when a cancellation direction shows up.
BoundValue ascend_ratio(const ConeAscent& cone, const RatioObjective& obj,
                        const AscentOptions& opts, std::uint64_t seed,
                        double den_floor) {
  Rng rng(derive_seed(seed, 0x9e0ULL));
  const int n = static_cast<int>(cone.G.rows());

  double best = 0.0;
  auto consider = [&](const Eigen::VectorXd& u_in,
                      bool* unbounded) -> double {
    Eigen::VectorXd u = u_in;
    const double nu = u.norm();
    if (nu <= 0.0) return -1.0;
    u /= nu;
    const double num = obj.numerator(u);
    const double den = obj.denominator(u);
    if (den < den_floor) {
      if (num > 1e-12) *unbounded = true;
      return -1.0;
    }
    return num / den;
  };

  bool unbounded = false;

  // Deterministic starts: axis vectors on J and the softest direction of
  // the J-restricted Gram block.
  std::vector<Eigen::VectorXd> starts;
  for (std::size_t t = 0; t < cone.J.size() && t < 16; ++t) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[cone.J[t]] = 1.0;
    starts.push_back(e);
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        submatrix(cone.G, cone.J, cone.J));
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (std::size_t t = 0; t < cone.J.size(); ++t)
      e[cone.J[t]] = es.eigenvectors().col(0)[t];
    starts.push_back(e);
  }
  while (static_cast<int>(starts.size()) < opts.starts)
    starts.push_back(cone.random_cone_point(rng));

  // Plain random sampling pass.
  Eigen::VectorXd best_sample;
  for (int s = 0; s < opts.cone_samples; ++s) {
    Eigen::VectorXd u = cone.random_cone_point(rng);
    const double r = consider(u, &unbounded);
    if (r > best) {
      best = r;
      best_sample = u;
    }
  }
  if (best_sample.size() > 0) starts.push_back(best_sample);

  for (auto& u0 : starts) {
    Eigen::VectorXd u = u0;
    cone.repair(u);
    double nu = u.norm();
    if (nu <= 0.0) continue;
    u /= nu;
    double r = consider(u, &unbounded);
    if (r < 0.0) continue;
    double step = opts.step;
    for (int it = 0; it < opts.iters && step > 1e-16; ++it) {
      const double num = obj.numerator(u);
      const double den = obj.denominator(u);
      if (den < den_floor) break;
      // gradient of num/den
      Eigen::VectorXd g =
          (obj.num_grad(u) - (num / den) * obj.den_grad(u)) / den;
      bool improved = false;
      double trial_step = step;
      for (int bt = 0; bt < 40; ++bt) {
        Eigen::VectorXd v = u + trial_step * g;
        cone.repair(v);
        const double nv = v.norm();
        if (nv > 0.0) {
          v /= nv;
          const double rv = consider(v, &unbounded);
          if (rv > r + 1e-15) {
            u = v;
            r = rv;
            step = trial_step * 1.5;
            improved = true;
            break;
          }
        }
        trial_step *= 0.5;
      }
      if (!improved) break;
    }
    best = std::max(best, r);
  }

  if (unbounded) return BoundValue::unbounded();
  return BoundValue::finite(best);
}

struct Beta2Objective final : RatioObjective {
  const Eigen::MatrixXd& G;
  const std::vector<bool>& mask;
  Beta2Objective(const Eigen::MatrixXd& g, const std::vector<bool>& m)
      : G(g), mask(m) {}
  double numerator(const Eigen::VectorXd& u) const override {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) s += u[i] * u[i];
    return std::sqrt(s);
  }
  Eigen::VectorXd num_grad(const Eigen::VectorXd& u) const override {
    const double s = std::max(numerator(u), 1e-300);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) g[i] = u[i] / s;
    return g;
  }
  double denominator(const Eigen::VectorXd& u) const override {
    return std::sqrt(std::max(u.dot(G * u), 0.0));
  }
  Eigen::VectorXd den_grad(const Eigen::VectorXd& u) const override {
    const double d = std::max(denominator(u), 1e-300);
    return (G * u) / d;
  }
};

struct BetaL1Objective final : RatioObjective {
  const Eigen::MatrixXd& G;
  const std::vector<bool>& mask;
  double l1_over_l2; // L1 norm = l1_over_l2 * sqrt(u' G u)
  BetaL1Objective(const Eigen::MatrixXd& g, const std::vector<bool>& m,
                  double c)
      : G(g), mask(m), l1_over_l2(c) {}
  double numerator(const Eigen::VectorXd& u) const override {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) s += std::abs(u[i]);
    return s;
  }
  Eigen::VectorXd num_grad(const Eigen::VectorXd& u) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) g[i] = u[i] >= 0.0 ? 1.0 : -1.0;
    return g;
  }
  double denominator(const Eigen::VectorXd& u) const override {
    return l1_over_l2 * std::sqrt(std::max(u.dot(G * u), 0.0));
  }
  Eigen::VectorXd den_grad(const Eigen::VectorXd& u) const override {
    const double d = std::sqrt(std::max(u.dot(G * u), 1e-300));
    return l1_over_l2 * (G * u) / d;
  }
};

// Monte Carlo L1 objective for the Rademacher kind: the norm is evaluated
// on a fixed sign matrix so the ascent target is deterministic.
struct BetaMcObjective final : RatioObjective {
  Eigen::MatrixXd R; // mc x N fixed Rademacher draws
  const std::vector<bool>& mask;
  BetaMcObjective(int n_funcs, int mc, std::uint64_t seed,
                  const std::vector<bool>& m)
      : mask(m) {
    R.resize(mc, n_funcs);
    for (int i = 0; i < mc; ++i) {
      Rng row(derive_seed(seed, 0xbead0000ULL + i));
      for (int k = 0; k < n_funcs; ++k) R(i, k) = row.rademacher();
    }
  }
  double numerator(const Eigen::VectorXd& u) const override {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) s += std::abs(u[i]);
    return s;
  }
  Eigen::VectorXd num_grad(const Eigen::VectorXd& u) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (int i = 0; i < u.size(); ++i)
      if (mask[i]) g[i] = u[i] >= 0.0 ? 1.0 : -1.0;
    return g;
  }
  double denominator(const Eigen::VectorXd& u) const override {
    return (R * u).cwiseAbs().mean();
  }
  Eigen::VectorXd den_grad(const Eigen::VectorXd& u) const override {
    const Eigen::VectorXd s = (R * u).cwiseSign();
    return R.transpose() * s / static_cast<double>(R.rows());
  }
};

// Certified cancellation probes: pairs e_i +/- e_j and null eigenvectors
// of the Gram that lie in the cone witness beta2 = infinity exactly.
bool find_cancellation(const IndexSet& J, const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(gram.rows());
  const auto mask = member_mask(J, n);
  if (kappa(J, gram) <= kEigFloor) return true;
  for (int i : J)
    for (int j = 0; j < n; ++j) {
      if (mask[j] || j == i) continue;
      const double a = gram(i, i) + gram(j, j);
      if (a - 2.0 * gram(i, j) <= kEigFloor) return true;
      if (a + 2.0 * gram(i, j) <= kEigFloor) return true;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  for (int c = 0; c < n; ++c) {
    if (es.eigenvalues()[c] > kEigFloor) continue;
    const Eigen::VectorXd v = es.eigenvectors().col(c);
    double on = 0.0;
    for (int j : J) on += v[j] * v[j];
    if (on > 1e-12 && in_cone(v, J)) return true;
  }
  return false;
}

} // namespace

BoundValue beta2_estimate(const IndexSet& J, const Eigen::MatrixXd& gram,
                          const AscentOptions& opts, std::uint64_t seed) {
  if (J.empty()) throw std::invalid_argument("beta2 needs a nonempty J");
  if (find_cancellation(J, gram)) return BoundValue::unbounded();
  ConeAscent cone(gram, J);
  Beta2Objective obj(gram, cone.mask);
  return ascend_ratio(cone, obj, opts, seed, 1e-7);
}

BoundValue beta_estimate(const IndexSet& J, const DictionaryModel& model,
                         const AscentOptions& opts, std::uint64_t seed) {
  if (J.empty()) return BoundValue::finite(0.0);
  if (find_cancellation(J, model.gram)) return BoundValue::unbounded();
  ConeAscent cone(model.gram, J);
  if (has_gaussian_features(model)) {
    BetaL1Objective obj(model.gram, cone.mask, kSqrt2OverPi);
    return ascend_ratio(cone, obj, opts, seed, 1e-7);
  }
  AscentOptions mc_opts = opts;
  mc_opts.cone_samples = std::min(opts.cone_samples, 2000);
  BetaMcObjective obj(model.n_funcs, 4096, derive_seed(seed, 0x4c1ULL),
                      cone.mask);
  return ascend_ratio(cone, obj, mc_opts, seed, 1e-7);
}

double beta_bound_product(const IndexSet& J, double B, double beta2) {
  return B * beta2 * std::sqrt(static_cast<double>(J.size()));
}

BoundValue d_tilde(const IndexSet& J, double B, const Eigen::MatrixXd& gram) {
  if (J.empty()) return BoundValue::finite(0.0);
  const double k = kappa(J, gram);
  const double r = rho_complement(J, gram);
  if (k <= kEigFloor || r >= 1.0 - 1e-12) return BoundValue::unbounded();
  return BoundValue::finite(B * B * static_cast<double>(J.size()) /
                            (k * (1.0 - r * r)));
}

double comparison_constant(const DictionaryModel& model, std::uint64_t) {
  if (has_gaussian_features(model)) return std::sqrt(M_PI / 2.0);
  // Rademacher: || f ||_{L2} / || f ||_{L1} maximized over equal-weight
  // k-sparse vectors; E|sum of k signs| has an exact binomial form.
  double best = 1.0;
  for (int k = 1; k <= std::min(model.n_funcs, 24); ++k) {
    double e_abs = 0.0;
    for (int heads = 0; heads <= k; ++heads) {
      const double walk = std::abs(2.0 * heads - k);
      double logp = -k * std::log(2.0);
      for (int i = 1; i <= heads; ++i)
        logp += std::log(double(k - heads + i)) - std::log(double(i));
      e_abs += walk * std::exp(logp);
    }
    best = std::max(best, std::sqrt(double(k)) / e_abs);
  }
  return best;
}

GeometryReport diagnose(const Eigen::MatrixXd& gram, const IndexSet& J,
                        int d_max, double B, const AscentOptions& opts,
                        std::uint64_t seed) {
  GeometryReport rep;
  rep.J = J;
  rep.B = B;
  const int n = static_cast<int>(gram.rows());
  if (!J.empty()) {
    rep.kappa = kappa(J, gram);
    rep.rho = rho_complement(J, gram);
    rep.beta2_est = beta2_estimate(J, gram, opts, seed);
    rep.beta2_bound_kr = beta2_bound_kappa_rho(J, gram);
    rep.beta2_bound_lem2 = beta2_bound_lemma2(J, gram);
    rep.beta2_bound_p3 = BoundValue::inapplicable();
    for (int s = 1; static_cast<int>(J.size()) + s <= n; ++s) {
      const BoundValue b = beta2_bound_prop3(J, s, gram);
      if (b.is_finite() && (!rep.beta2_bound_p3.is_finite() ||
                            b.value < rep.beta2_bound_p3.value)) {
        rep.beta2_bound_p3 = b;
        rep.beta2_bound_p3_s = s;
      }
    }
    // beta over the Gaussian feature law implied by the Gram matrix
    ConeAscent cone(gram, J);
    BetaL1Objective obj(gram, cone.mask, kSqrt2OverPi);
    rep.beta_est = find_cancellation(J, gram)
                       ? BoundValue::unbounded()
                       : ascend_ratio(cone, obj, opts, seed, 1e-7);
    BoundValue b2 = rep.beta2_bound_lem2.is_finite() ? rep.beta2_bound_lem2
                                                     : rep.beta2_bound_kr;
    rep.beta_bound = b2.is_finite()
                         ? BoundValue::finite(beta_bound_product(J, B, b2.value))
                         : BoundValue::unbounded();
    rep.dtilde = d_tilde(J, B, gram);
  }

  const int dm = std::min(d_max, n);
  for (int d = 1; d <= dm; ++d) {
    const MdPair p = md_Md(d, gram);
    rep.m.push_back(p.m);
    rep.M.push_back(p.M);
    rep.delta.push_back(std::max(p.M - 1.0, 1.0 - p.m));
  }
  for (int d = 1; 3 * d <= n && d <= dm; ++d)
    rep.rho_sparse.push_back(rho_d(d, gram));
  for (int d = 1; 3 * d <= n && d <= dm; ++d) {
    const double del = delta_d(3 * d, gram);
    if (del >= 1.0) {
      rep.rho_delta_diag.push_back(std::numeric_limits<double>::infinity());
    } else {
      const double a = (1.0 + del) / (1.0 - del);
      const double b = (1.0 - del) / (1.0 + del);
      rep.rho_delta_diag.push_back(std::max(a * a - 1.0, 1.0 - b * b));
    }
  }
  return rep;
}

} // namespace sparselab
