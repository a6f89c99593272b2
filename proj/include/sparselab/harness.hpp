#pragma once

#include "sparselab/dictionary.hpp"
#include "sparselab/estimators.hpp"
#include "sparselab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sparselab {

struct TrialRecord {
  std::uint64_t seed = 0;
  bool feasible_star = false;
  double err_l1 = 0.0, err_l2 = 0.0; // NaN when coefficients unidentifiable
  double err_L1_pop = 0.0, err_L2_pop = 0.0, err_L2_emp = 0.0;
  bool exact_recovery = false, support_recovered = false;
  double epsilon_used = 0.0;
  double runtime_ms = 0.0;
};

enum class CoefProfile { sparse, geometric };

struct ExperimentConfig {
  DictionaryModel model;
  int n = 0;
  int d_star = 1;
  CoefProfile coef_profile = CoefProfile::sparse;
  double coef_magnitude = 1.0;
  double coef_decay = 0.75; // geometric profile only
  double sigma = 0.0;
  double gamma = 0.0; // off-span component magnitude
  EpsilonRule epsilon_rule;
  int reps = 1;
  std::uint64_t seed = 1;
  double A = 1.0;
  double D = 8.0; // configured constant for the D-form bounds
  std::vector<std::string> bound_suite;
};

void validate_config(const ExperimentConfig& config);

struct BoundCheck {
  std::string suite, bound_id;
  double lhs = 0.0;
  BoundValue rhs;
  bool holds = true;
  bool applicable = true; // suite preconditions held for this trial
};

struct TrialOutcome {
  TrialRecord record;
  Eigen::VectorXd lambda_hat, lambda_star;
  double max_correlation = 0.0; // of lambda_star against the data
  std::vector<BoundCheck> bounds;
};

// Population-side geometry shared by every trial of a config: the Lemma 2
// upper bounds at sizes d and 2d (exact, J-independent) and the L1-L2
// comparison constant.
struct SuiteGeometry {
  double B = 0.0;
  BoundValue beta2_J;   // bound valid for every J with d(J) = d_star
  BoundValue beta2_d;   // bound for beta2(d) = max over d(J) <= 2 d_star
  BoundValue beta;      // B * beta2_J * sqrt(d_star)
};

SuiteGeometry make_suite_geometry(const ExperimentConfig& config);

TrialOutcome run_trial(const ExperimentConfig& config,
                       const SuiteGeometry& geom, std::uint64_t trial_seed);

struct SummaryStat {
  double mean = 0.0, median = 0.0, q95 = 0.0;
  int count = 0;
};

struct ExperimentSummary {
  int reps = 0;
  std::map<std::string, SummaryStat> metrics;
  double recovery_rate = 0.0;
  double feasibility_rate = 0.0;
  std::map<std::string, double> bound_hold_rates;
  std::map<std::string, double> slope_fits; // filled by sweep drivers
};

struct ExperimentResult {
  std::vector<TrialOutcome> trials;
  ExperimentSummary summary;
};

// Runs `reps` independent trials on derived seeds. `on_trial`, when set,
// receives outcomes in trial order (streamed when threads == 1).
ExperimentResult run_experiment(
    const ExperimentConfig& config, int threads = 1,
    const std::function<void(int, const TrialOutcome&)>& on_trial = nullptr);

ExperimentSummary summarize(const std::vector<TrialOutcome>& trials,
                            const std::vector<std::string>& suites);

// Everything the bound right-hand sides consume for one trial.
struct BoundContext {
  double epsilon = 0.0;
  int d = 0; // d(lambda*), or d(mu*) for the grouped scenario
  double gamma = 0.0;
  double B = 0.0;
  BoundValue beta, beta2_J, beta2_d;
  BoundValue beta2_hat_J, beta2_hat_d; // empirical-Gram versions
  BoundValue dtilde;
  double D = 8.0;
  Eigen::VectorXd lambda_star;
};

// Evaluates the requested suites' inequalities for one trial; an unbounded
// right-hand side holds vacuously, and suites whose preconditions fail are
// flagged inapplicable rather than counted.
std::vector<BoundCheck> verify_bounds(const TrialRecord& trial,
                                      const BoundContext& ctx,
                                      const std::vector<std::string>& suites);

// Least-squares slope of log(y) on log(x); pairs with nonpositive entries
// are rejected.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace sparselab
