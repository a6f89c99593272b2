#include "sparselab/empirical.hpp"

#include "sparselab/orlicz.hpp"
#include "sparselab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparselab {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;

// Population L1 norm of f_u and its (sub)gradient. Closed form for
// Gaussian feature laws; a fixed Monte Carlo panel for the Rademacher kind
// so the ascent target stays deterministic.
struct PopL1 {
  const DictionaryModel& model;
  Eigen::MatrixXd R; // Rademacher panel (empty for Gaussian kinds)

  PopL1(const DictionaryModel& m, std::uint64_t seed) : model(m) {
    if (!has_gaussian_features(m)) {
      const int mc = 16384;
      R.resize(mc, m.n_funcs);
      for (int i = 0; i < mc; ++i) {
        Rng row(derive_seed(seed, 0xf00d0000ULL + i));
        for (int k = 0; k < m.n_funcs; ++k) R(i, k) = row.rademacher();
      }
    }
  }

  double value(const Eigen::VectorXd& u) const {
    if (R.size() == 0)
      return kSqrt2OverPi * std::sqrt(std::max(u.dot(model.gram * u), 0.0));
    return (R * u).cwiseAbs().mean();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& u) const {
    if (R.size() == 0) {
      const double l2 = std::sqrt(std::max(u.dot(model.gram * u), 1e-300));
      return kSqrt2OverPi * (model.gram * u) / l2;
    }
    return R.transpose() * (R * u).cwiseSign() / double(R.rows());
  }
};

double emp_abs_mean(const Eigen::MatrixXd& H, const Eigen::VectorXd& u) {
  return (H * u).cwiseAbs().mean();
}

Eigen::VectorXd emp_abs_grad(const Eigen::MatrixXd& H,
                             const Eigen::VectorXd& u) {
  return H.transpose() * (H * u).cwiseSign() / double(H.rows());
}

} // namespace

double empproc_sup_l1ball(const DictionaryModel& model, int n, int restarts,
                          std::uint64_t seed) {
  const DesignSample design = sample_design(model, n, seed);
  const Eigen::MatrixXd& H = design.H;
  const int N = model.n_funcs;
  PopL1 pop(model, derive_seed(seed, 0x10ULL));

  double best = 0.0;
  Eigen::VectorXd best_u = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e[k] = 1.0;
    const double v = std::abs(emp_abs_mean(H, e) - pop.value(e));
    if (v > best) {
      best = v;
      best_u = e;
    }
  }

  Rng rng(derive_seed(seed, 0x11ULL));
  auto run_ascent = [&](Eigen::VectorXd u, double sgn) {
    double l1 = u.lpNorm<1>();
    if (l1 <= 0.0) return;
    u /= l1;
    double val = sgn * (emp_abs_mean(H, u) - pop.value(u));
    double step = 0.05;
    for (int it = 0; it < 120 && step > 1e-12; ++it) {
      const Eigen::VectorXd g = sgn * (emp_abs_grad(H, u) - pop.grad(u));
      Eigen::VectorXd v = u + step * g;
      const double vl1 = v.lpNorm<1>();
      if (vl1 <= 0.0) break;
      v /= vl1;
      const double vv = sgn * (emp_abs_mean(H, v) - pop.value(v));
      if (vv > val + 1e-15) {
        u = v;
        val = vv;
        step *= 1.3;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, val);
  };

  run_ascent(best_u, best_u.size() > 0 && emp_abs_mean(H, best_u) >
                             pop.value(best_u)
                         ? 1.0
                         : -1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd u(N);
    for (int k = 0; k < N; ++k) u[k] = rng.normal();
    run_ascent(u, 1.0);
    run_ascent(u, -1.0);
  }
  return best;
}

double empproc_sup_l1ball_sq(const DictionaryModel& model, int n,
                             int restarts, std::uint64_t seed) {
  const DesignSample design = sample_design(model, n, seed);
  const Eigen::MatrixXd Gn =
      design.H.transpose() * design.H / double(design.n);
  const Eigen::MatrixXd M = Gn - model.gram; // (Pi_n - Pi)(f_u^2) = u'Mu
  const int N = model.n_funcs;

  double best = 0.0;
  for (int i = 0; i < N; ++i) {
    best = std::max(best, std::abs(M(i, i)));
    for (int j = i + 1; j < N; ++j) {
      best = std::max(best,
                      std::abs(M(i, i) + M(j, j) + 2.0 * M(i, j)) / 4.0);
      best = std::max(best,
                      std::abs(M(i, i) + M(j, j) - 2.0 * M(i, j)) / 4.0);
    }
  }

  Rng rng(derive_seed(seed, 0x12ULL));
  auto run_ascent = [&](Eigen::VectorXd u, double sgn) {
    double l1 = u.lpNorm<1>();
    if (l1 <= 0.0) return;
    u /= l1;
    double val = sgn * u.dot(M * u);
    double step = 0.05;
    for (int it = 0; it < 120 && step > 1e-12; ++it) {
      Eigen::VectorXd v = u + step * sgn * 2.0 * (M * u);
      const double vl1 = v.lpNorm<1>();
      if (vl1 <= 0.0) break;
      v /= vl1;
      const double vv = sgn * v.dot(M * v);
      if (vv > val + 1e-15) {
        u = v;
        val = vv;
        step *= 1.3;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, val);
  };
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd u(N);
    for (int k = 0; k < N; ++k) u[k] = rng.normal();
    run_ascent(u, 1.0);
    run_ascent(u, -1.0);
  }
  return best;
}

double empproc_sup_cone(const DictionaryModel& model, int n,
                        const IndexSet& J, int d, int restarts,
                        std::uint64_t seed) {
  if (J.empty()) return 0.0; // C_empty = {0}
  if (static_cast<int>(J.size()) > d)
    throw std::invalid_argument("empproc_sup_cone needs d(J) <= d");
  const DesignSample design = sample_design(model, n, seed);
  const Eigen::MatrixXd& H = design.H;
  const int N = model.n_funcs;
  PopL1 pop(model, derive_seed(seed, 0x13ULL));

  std::vector<bool> in_J(N, false);
  for (int j : J) in_J[j] = true;
  auto repair = [&](Eigen::VectorXd& u) {
    double on = 0.0, off = 0.0;
    for (int i = 0; i < N; ++i) (in_J[i] ? on : off) += std::abs(u[i]);
    if (off <= on) return;
    const double t = on > 0.0 ? on / off : 0.0;
    for (int i = 0; i < N; ++i)
      if (!in_J[i]) u[i] *= t;
  };
  auto eval = [&](const Eigen::VectorXd& u) {
    return std::abs(emp_abs_mean(H, u) - pop.value(u));
  };

  double best = 0.0;
  Rng rng(derive_seed(seed, 0x14ULL));

  auto run_ascent = [&](Eigen::VectorXd u, double sgn) {
    repair(u);
    double l2 = u.norm();
    if (l2 <= 0.0) return;
    u /= l2;
    double val = sgn * (emp_abs_mean(H, u) - pop.value(u));
    double step = 0.05;
    for (int it = 0; it < 120 && step > 1e-12; ++it) {
      const Eigen::VectorXd g = sgn * (emp_abs_grad(H, u) - pop.grad(u));
      Eigen::VectorXd v = u + step * g;
      repair(v);
      const double vl2 = v.norm();
      if (vl2 <= 0.0) break;
      v /= vl2;
      const double vv = sgn * (emp_abs_mean(H, v) - pop.value(v));
      if (vv > val + 1e-15) {
        u = v;
        val = vv;
        step *= 1.3;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, val);
  };

  // J-supported axis probes plus random d-sparse unit directions repaired
  // into the cone.
  for (int j : J) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e[j] = 1.0;
    best = std::max(best, eval(e));
    run_ascent(e, 1.0);
    run_ascent(e, -1.0);
  }
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    std::vector<int> perm(N);
    for (int i = 0; i < N; ++i) perm[i] = i;
    for (int i = 0; i < d && i < N; ++i) {
      const int pick = i + static_cast<int>(rng.below(N - i));
      std::swap(perm[i], perm[pick]);
      u[perm[i]] = rng.normal();
    }
    repair(u);
    if (u.norm() > 0.0) {
      best = std::max(best, eval(u / u.norm()));
      run_ascent(u, 1.0);
      run_ascent(u, -1.0);
    }
  }
  return best;
}

bool bernstein_holds(const Eigen::VectorXd& means,
                     const Eigen::VectorXd& psi1_norms, int n, double A,
                     double C) {
  const double logN = std::log(std::max<double>(means.size(), 1));
  const double r = A * logN / double(n);
  const double rate = std::max(std::sqrt(r), r);
  for (int k = 0; k < means.size(); ++k)
    if (std::abs(means[k]) > C * psi1_norms[k] * rate) return false;
  return true;
}

BernsteinCheck bernstein_max_check(const DictionaryModel& model, int n,
                                   double A, double C, int reps,
                                   std::uint64_t seed) {
  const int N = model.n_funcs;
  Eigen::VectorXd psi1(N);
  if (has_gaussian_features(model)) {
    const double z1 = orlicz_norm_normal(1.0, Psi::psi1).value;
    for (int k = 0; k < N; ++k)
      psi1[k] = z1 * std::sqrt(model.gram(k, k));
  } else {
    psi1.setConstant(1.0 / std::log(2.0)); // |eta| = 1 a.s.
  }
  const double logN = std::log(double(N));
  const double r = A * logN / double(n);
  const double rate = std::max(std::sqrt(r), r);

  BernsteinCheck out;
  int holds = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const DesignSample d =
        sample_design(model, n, derive_seed(seed, 0xbe00ULL + rep));
    const Eigen::VectorXd means = d.H.colwise().mean();
    double rep_c = 0.0;
    for (int k = 0; k < N; ++k)
      rep_c = std::max(rep_c, std::abs(means[k]) / (psi1[k] * rate));
    out.min_constant = std::max(out.min_constant, rep_c);
    if (rep_c <= C) ++holds;
  }
  out.holds_rate = reps > 0 ? double(holds) / reps : 1.0;
  return out;
}

} // namespace sparselab
