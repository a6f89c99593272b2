#include "sparselab/harness.hpp"

#include "sparselab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace sparselab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRecoveryTol = 1e-6;
constexpr double kSupportTol = 1e-6;
constexpr double kSqrt2OverPi = 0.79788456080286535588;

bool coefficients_identifiable(const ExperimentConfig& c) {
  return c.model.kind != DictKind::grouped && c.gamma == 0.0;
}

bool wants(const std::vector<std::string>& suites, const std::string& s) {
  return std::find(suites.begin(), suites.end(), s) != suites.end();
}

Eigen::VectorXd make_lambda_star(const ExperimentConfig& cfg, Rng& rng) {
  const int N = cfg.model.n_funcs;
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(N);
  if (cfg.coef_profile == CoefProfile::geometric) {
    for (int j = 0; j < N; ++j) {
      const double sign = rng.rademacher();
      lam[j] = sign * cfg.coef_magnitude * std::pow(cfg.coef_decay, j);
    }
    return lam;
  }
  if (cfg.model.kind == DictKind::grouped) {
    // one representative coefficient per chosen block
    std::vector<int> blocks(cfg.model.blocks.size());
    std::iota(blocks.begin(), blocks.end(), 0);
    for (int t = 0; t < cfg.d_star; ++t) {
      const int pick = t + static_cast<int>(rng.below(blocks.size() - t));
      std::swap(blocks[t], blocks[pick]);
      lam[cfg.model.blocks[blocks[t]].front()] =
          rng.rademacher() * cfg.coef_magnitude;
    }
    return lam;
  }
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < cfg.d_star; ++t) {
    const int pick = t + static_cast<int>(rng.below(N - t));
    std::swap(idx[t], idx[pick]);
    lam[idx[t]] = rng.rademacher() * cfg.coef_magnitude;
  }
  return lam;
}

IndexSet support_of(const Eigen::VectorXd& v, double tol) {
  IndexSet s;
  for (int j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) > tol) s.push_back(j);
  return s;
}

double sq(double x) { return x * x; }

BoundCheck make_check(const std::string& suite, const std::string& id,
                      double lhs, BoundValue rhs, bool applicable) {
  BoundCheck c;
  c.suite = suite;
  c.bound_id = id;
  c.lhs = lhs;
  c.rhs = rhs;
  c.applicable = applicable;
  c.holds = !applicable || !rhs.is_finite() || lhs <= rhs.value + 1e-9;
  return c;
}

BoundValue scale(const BoundValue& b, double factor) {
  return b.is_finite() ? BoundValue::finite(b.value * factor)
                       : BoundValue::unbounded();
}

BoundValue scale_sq(const BoundValue& b, double factor) {
  return b.is_finite() ? BoundValue::finite(b.value * b.value * factor)
                       : BoundValue::unbounded();
}

} // namespace

void validate_config(const ExperimentConfig& c) {
  if (c.model.n_funcs < 2) throw std::invalid_argument("model.N must be >= 2");
  if (c.n < 1) throw std::invalid_argument("n must be >= 1");
  if (c.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (c.d_star < 0 || c.d_star > c.model.n_funcs)
    throw std::invalid_argument("d_star must lie in [0, N]");
  if (c.model.kind == DictKind::grouped &&
      c.d_star > static_cast<int>(c.model.blocks.size()))
    throw std::invalid_argument("d_star exceeds the number of blocks");
  if (c.sigma < 0.0 || c.gamma < 0.0)
    throw std::invalid_argument("sigma and gamma must be >= 0");
  if (c.gamma > 0.0 && !has_gaussian_features(c.model))
    throw std::invalid_argument(
        "misspecification requires a Gaussian feature law");
  if (c.A * std::log(double(c.model.n_funcs)) > double(c.n))
    throw std::invalid_argument("config requires A log N <= n");
  if (c.coef_profile == CoefProfile::geometric &&
      (c.coef_decay <= 0.0 || c.coef_decay >= 1.0))
    throw std::invalid_argument("coef_decay must lie in (0, 1)");
}

SuiteGeometry make_suite_geometry(const ExperimentConfig& config) {
  SuiteGeometry g;
  g.B = comparison_constant(config.model);
  if (config.bound_suite.empty()) return g;
  const int d = std::max(config.d_star, 1);
  const Eigen::MatrixXd& G = config.model.gram;
  const int N = config.model.n_funcs;

  auto lemma2_at = [&](int size) -> BoundValue {
    if (size < 1 || 3 * size > N) return BoundValue::inapplicable();
    IndexSet J(size);
    std::iota(J.begin(), J.end(), 0); // Lemma 2 depends on d(J) only
    try {
      return beta2_bound_lemma2(J, G);
    } catch (const BudgetError&) {
      return BoundValue::inapplicable();
    }
  };
  g.beta2_J = lemma2_at(d);
  g.beta2_d = lemma2_at(2 * d);
  g.beta = g.beta2_J.is_finite()
               ? BoundValue::finite(g.B * g.beta2_J.value * std::sqrt(d))
               : BoundValue::unbounded();
  return g;
}

std::vector<BoundCheck> verify_bounds(const TrialRecord& t,
                                      const BoundContext& ctx,
                                      const std::vector<std::string>& suites) {
  std::vector<BoundCheck> out;
  const double eps = ctx.epsilon;
  const double rd = std::sqrt(double(std::max(ctx.d, 0)));
  const bool cond = t.feasible_star; // conditioning event for the theorems

  if (wants(suites, "thm1")) {
    out.push_back(make_check("thm1", "L1_pop", t.err_L1_pop,
                             scale(ctx.beta, 16.0 * eps), cond));
    out.push_back(make_check("thm1", "l1", t.err_l1,
                             scale_sq(ctx.beta, 32.0 * eps), cond));
  }
  if (wants(suites, "thm2")) {
    const double B2 = ctx.B * ctx.B;
    out.push_back(make_check("thm2", "L2_pop", t.err_L2_pop,
                             scale(ctx.beta2_d, 16.0 * B2 * rd * eps), cond));
    out.push_back(make_check("thm2", "l2", t.err_l2,
                             scale_sq(ctx.beta2_d, 32.0 * B2 * rd * eps),
                             cond));
  }
  if (wants(suites, "thm3")) {
    out.push_back(make_check("thm3", "L2_pop", t.err_L2_pop,
                             scale(ctx.beta2_J, 8.0 * rd * eps), cond));
    out.push_back(make_check("thm3", "l1", t.err_l1,
                             scale_sq(ctx.beta2_J, 16.0 * ctx.d * eps), cond));
    out.push_back(make_check("thm3", "l2", t.err_l2,
                             scale_sq(ctx.beta2_d, 16.0 * rd * eps), cond));
  }
  if (wants(suites, "thm4")) {
    out.push_back(make_check("thm4", "L2_emp", t.err_L2_emp,
                             scale(ctx.beta2_hat_J, 4.0 * rd * eps), cond));
    out.push_back(make_check("thm4", "l1", t.err_l1,
                             scale_sq(ctx.beta2_hat_J, 8.0 * ctx.d * eps),
                             cond));
    out.push_back(make_check("thm4", "l2", t.err_l2,
                             scale_sq(ctx.beta2_hat_d, 8.0 * rd * eps), cond));
  }
  if (wants(suites, "cor1")) {
    out.push_back(make_check(
        "cor1", "l2", t.err_l2,
        BoundValue::finite(16.0 * ctx.B * ctx.B * rd * eps), cond));
  }
  if (wants(suites, "cor2")) {
    out.push_back(make_check("cor2", "exact", t.err_l2,
                             BoundValue::finite(kRecoveryTol), cond));
  }
  if (wants(suites, "cor3")) {
    double thresh_sum = 0.0;
    for (int j = 0; j < ctx.lambda_star.size(); ++j)
      thresh_sum += std::min(sq(ctx.lambda_star[j]), sq(eps));
    out.push_back(make_check("cor3", "l2_sq", sq(t.err_l2),
                             BoundValue::finite(ctx.D * thresh_sum), cond));
  }
  if (wants(suites, "cor5")) {
    const BoundValue rhs =
        ctx.dtilde.is_finite()
            ? BoundValue::finite(sq(ctx.gamma) +
                                 256.0 * ctx.dtilde.value * sq(eps))
            : BoundValue::unbounded();
    out.push_back(
        make_check("cor5", "L2_pop_sq", sq(t.err_L2_pop), rhs, cond));
  }
  if (wants(suites, "prop1")) {
    out.push_back(make_check("prop1", "l2", t.err_l2,
                             BoundValue::finite(ctx.D * rd * eps), cond));
  }
  if (wants(suites, "prop2")) {
    out.push_back(make_check("prop2", "feasible", t.feasible_star ? 0.0 : 1.0,
                             BoundValue::finite(0.5), true));
  }
  if (wants(suites, "example2")) {
    out.push_back(make_check("example2", "L2_pop_sq", sq(t.err_L2_pop),
                             BoundValue::finite(ctx.D * ctx.d * sq(eps)),
                             cond));
  }
  return out;
}

TrialOutcome run_trial(const ExperimentConfig& config,
                       const SuiteGeometry& geom, std::uint64_t trial_seed) {
  const int N = config.model.n_funcs;
  TrialOutcome out;
  out.record.seed = trial_seed;

  Rng coef_rng(derive_seed(trial_seed, 1));
  out.lambda_star = make_lambda_star(config, coef_rng);
  const DesignSample design =
      sample_design(config.model, config.n, derive_seed(trial_seed, 2));
  const ResponseSample response =
      sample_response(design, out.lambda_star, config.sigma, config.gamma,
                      derive_seed(trial_seed, 3));

  EpsilonRule rule = config.epsilon_rule;
  const double hk_norm = rule.norm_source == NormSource::population
                             ? max_hk_norm_population(config.model)
                             : max_hk_norm_empirical(design.H);
  const double epsilon = epsilon_calibrate(rule, hk_norm, N, config.n);
  out.record.epsilon_used = epsilon;

  const auto t0 = std::chrono::steady_clock::now();
  const SelectorResult sel = dantzig_select(design.H, response.y, epsilon);
  out.record.runtime_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - t0)
          .count();
  out.lambda_hat = sel.lambda_hat;

  const FeasibilityResult feas =
      feasibility_check(out.lambda_star, design.H, response.y, epsilon);
  out.record.feasible_star = feas.feasible;
  out.max_correlation = feas.max_correlation;

  const Eigen::VectorXd diff = out.lambda_hat - out.lambda_star;
  const double v_span = std::max(diff.dot(config.model.gram * diff), 0.0);
  const double v_total = v_span + sq(config.gamma);
  out.record.err_L2_pop = std::sqrt(v_total);
  if (has_gaussian_features(config.model)) {
    out.record.err_L1_pop = kSqrt2OverPi * std::sqrt(v_total);
  } else {
    out.record.err_L1_pop =
        population_l1_norm(diff, config.model, 100000,
                           derive_seed(trial_seed, 4));
  }
  out.record.err_L2_emp =
      std::sqrt((design.H * diff).squaredNorm() / double(design.n));

  if (coefficients_identifiable(config)) {
    out.record.err_l1 = diff.lpNorm<1>();
    out.record.err_l2 = diff.norm();
    out.record.exact_recovery = out.record.err_l2 <= kRecoveryTol;
    out.record.support_recovered =
        support_of(out.lambda_hat, kSupportTol) ==
        support_of(out.lambda_star, kSupportTol);
  } else {
    out.record.err_l1 = kNaN;
    out.record.err_l2 = kNaN;
    out.record.exact_recovery = false;
    out.record.support_recovered = false;
  }

  if (!config.bound_suite.empty()) {
    BoundContext ctx;
    ctx.epsilon = epsilon;
    ctx.d = config.coef_profile == CoefProfile::geometric
                ? static_cast<int>(support_of(out.lambda_star, 0.0).size())
                : config.d_star;
    ctx.gamma = config.gamma;
    ctx.B = geom.B;
    ctx.beta = geom.beta;
    ctx.beta2_J = geom.beta2_J;
    ctx.beta2_d = geom.beta2_d;
    ctx.D = config.D;
    ctx.lambda_star = out.lambda_star;

    const IndexSet J = support_of(out.lambda_star, 0.0);
    if (wants(config.bound_suite, "cor5"))
      ctx.dtilde = J.empty() ? BoundValue::finite(0.0)
                             : d_tilde(J, geom.B, config.model.gram);
    if (wants(config.bound_suite, "thm4") && !J.empty()) {
      const Eigen::MatrixXd Gn =
          design.H.transpose() * design.H / double(design.n);
      AscentOptions light;
      light.starts = 8;
      light.iters = 120;
      light.cone_samples = 1000;
      ctx.beta2_hat_J =
          beta2_estimate(J, Gn, light, derive_seed(trial_seed, 5));
      // beta2(d) needs a max over all J of size 2d; past the enumeration
      // budget we sample subsets, which keeps the estimate a lower bound.
      BoundValue best = ctx.beta2_hat_J;
      Rng sub_rng(derive_seed(trial_seed, 6));
      const int target = std::min(2 * ctx.d, N);
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<int> idx(N);
        std::iota(idx.begin(), idx.end(), 0);
        IndexSet S;
        for (int t = 0; t < target; ++t) {
          const int pick = t + static_cast<int>(sub_rng.below(N - t));
          std::swap(idx[t], idx[pick]);
          S.push_back(idx[t]);
        }
        std::sort(S.begin(), S.end());
        AscentOptions lighter = light;
        lighter.starts = 4;
        lighter.iters = 80;
        lighter.cone_samples = 400;
        const BoundValue b =
            beta2_estimate(S, Gn, lighter, derive_seed(trial_seed, 7 + rep));
        if (b.is_unbounded())
          best = BoundValue::unbounded();
        else if (best.is_finite() && b.value > best.value)
          best = b;
      }
      ctx.beta2_hat_d = best;
    }
    out.bounds = verify_bounds(out.record, ctx, config.bound_suite);
  }
  return out;
}

ExperimentSummary summarize(const std::vector<TrialOutcome>& trials,
                            const std::vector<std::string>& suites) {
  ExperimentSummary s;
  s.reps = static_cast<int>(trials.size());

  auto stat = [&](auto getter) {
    SummaryStat st;
    std::vector<double> vals;
    for (const auto& t : trials) {
      const double v = getter(t.record);
      if (!std::isnan(v)) vals.push_back(v);
    }
    st.count = static_cast<int>(vals.size());
    if (vals.empty()) {
      st.mean = st.median = st.q95 = kNaN;
      return st;
    }
    std::sort(vals.begin(), vals.end());
    st.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    const std::size_t n = vals.size();
    st.median = n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    const std::size_t q = std::min(
        n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1);
    st.q95 = vals[q];
    return st;
  };

  s.metrics["err_l1"] = stat([](const TrialRecord& r) { return r.err_l1; });
  s.metrics["err_l2"] = stat([](const TrialRecord& r) { return r.err_l2; });
  s.metrics["err_L1_pop"] =
      stat([](const TrialRecord& r) { return r.err_L1_pop; });
  s.metrics["err_L2_pop"] =
      stat([](const TrialRecord& r) { return r.err_L2_pop; });
  s.metrics["err_L2_emp"] =
      stat([](const TrialRecord& r) { return r.err_L2_emp; });
  s.metrics["epsilon_used"] =
      stat([](const TrialRecord& r) { return r.epsilon_used; });
  s.metrics["runtime_ms"] =
      stat([](const TrialRecord& r) { return r.runtime_ms; });

  int rec = 0, feas = 0;
  for (const auto& t : trials) {
    rec += t.record.exact_recovery ? 1 : 0;
    feas += t.record.feasible_star ? 1 : 0;
  }
  s.recovery_rate = trials.empty() ? 0.0 : double(rec) / trials.size();
  s.feasibility_rate = trials.empty() ? 0.0 : double(feas) / trials.size();

  for (const auto& suite : suites) {
    int applicable = 0, held = 0;
    for (const auto& t : trials) {
      bool any = false, all = true;
      for (const auto& b : t.bounds) {
        if (b.suite != suite || !b.applicable) continue;
        any = true;
        all = all && b.holds;
      }
      if (any) {
        ++applicable;
        held += all ? 1 : 0;
      }
    }
    s.bound_hold_rates[suite] =
        applicable > 0 ? double(held) / applicable : 1.0;
  }
  return s;
}

ExperimentResult run_experiment(
    const ExperimentConfig& config, int threads,
    const std::function<void(int, const TrialOutcome&)>& on_trial) {
  validate_config(config);
  const SuiteGeometry geom = make_suite_geometry(config);

  ExperimentResult result;
  result.trials.resize(config.reps);
  std::vector<std::uint64_t> seeds(config.reps);
  for (int i = 0; i < config.reps; ++i)
    seeds[i] = derive_seed(config.seed, static_cast<std::uint64_t>(i));

  if (threads <= 1) {
    for (int i = 0; i < config.reps; ++i) {
      result.trials[i] = run_trial(config, geom, seeds[i]);
      if (on_trial) on_trial(i, result.trials[i]);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= config.reps) break;
        result.trials[i] = run_trial(config, geom, seeds[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (on_trial)
      for (int i = 0; i < config.reps; ++i) on_trial(i, result.trials[i]);
  }

  result.summary = summarize(result.trials, config.bound_suite);
  return result;
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope needs matched samples of size >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw std::invalid_argument("log-log slope needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace sparselab
