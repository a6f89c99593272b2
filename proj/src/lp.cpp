#include "sparselab/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sparselab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-10;
constexpr double kDualTol = 1e-9;
constexpr int kRefactorEvery = 64;
constexpr int kStallLimit = 100;
constexpr int kMaxIterations = 200000;

enum class VarState { basic, at_lower, at_upper, free_zero };

// Bounded-variable simplex over the extended system [A | I] x = b with
// slack bounds encoding the row relations.
class Simplex {
public:
  explicit Simplex(const LPProblem& p)
      : m_(static_cast<int>(p.rows.size())),
        ns_(static_cast<int>(p.objective.size())) {
    nv_ = ns_ + m_;
    A_.resize(m_, nv_);
    A_.setZero();
    b_.resize(m_);
    lo_.resize(nv_);
    hi_.resize(nv_);
    cost_.setZero(nv_);
    for (int j = 0; j < ns_; ++j) {
      lo_[j] = p.lower[j];
      hi_[j] = p.upper[j];
      cost_[j] = p.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      A_.row(i).head(ns_) = p.rows[i].coeffs.transpose();
      A_(i, ns_ + i) = 1.0;
      b_[i] = p.rows[i].rhs;
      lo_[ns_ + i] = 0.0;
      hi_[ns_ + i] = p.rows[i].rel == Relation::le ? kInf : 0.0;
    }
  }

  LPSolution run() {
    LPSolution sol;
    for (int j = 0; j < nv_; ++j)
      if (lo_[j] > hi_[j]) {
        sol.status = LPStatus::infeasible;
        return sol;
      }

    init_point();
    if (m_ > 0 && needs_phase1()) {
      set_phase1_costs();
      iterate(/*phase1=*/true);
      if (phase1_objective() > 1e-9 * (1.0 + b_.cwiseAbs().maxCoeff())) {
        return infeasible_solution();
      }
      freeze_artificials();
    }
    active_cost_ = cost_;
    const bool bounded = iterate(/*phase1=*/false);
    if (!bounded) return unbounded_solution();
    return optimal_solution();
  }

  int iterations() const { return total_iters_; }

private:
  int m_, ns_, nv_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, lo_, hi_, cost_, active_cost_;
  std::vector<VarState> state_;
  std::vector<int> basic_;          // row -> variable
  Eigen::VectorXd xB_;              // basic values
  Eigen::VectorXd x_nb_;            // nonbasic resting values (all vars)
  Eigen::MatrixXd Binv_;
  int pivots_since_refactor_ = 0;
  int total_iters_ = 0;
  bool bland_ = false;
  // artificials, appended past the slacks when phase 1 is needed
  int n_art_ = 0;
  int unbounded_var_ = -1;
  double unbounded_dir_ = 0.0;
  Eigen::VectorXd unbounded_w_;

  double rest_value(int j) const {
    switch (state_[j]) {
      case VarState::at_lower: return lo_[j];
      case VarState::at_upper: return hi_[j];
      default: return 0.0;
    }
  }

  void init_point() {
    state_.assign(nv_, VarState::at_lower);
    for (int j = 0; j < nv_; ++j) {
      if (std::isfinite(lo_[j]) &&
          (!std::isfinite(hi_[j]) || std::abs(lo_[j]) <= std::abs(hi_[j])))
        state_[j] = VarState::at_lower;
      else if (std::isfinite(hi_[j]))
        state_[j] = VarState::at_upper;
      else
        state_[j] = VarState::free_zero;
    }
    x_nb_.resize(nv_);
    for (int j = 0; j < nv_; ++j) x_nb_[j] = rest_value(j);

    // Residual each row must cover once nonbasics rest at their bounds.
    Eigen::VectorXd resid = b_;
    for (int j = 0; j < ns_; ++j)
      if (x_nb_[j] != 0.0) resid -= A_.col(j) * x_nb_[j];

    basic_.assign(m_, -1);
    xB_.resize(m_);
    std::vector<double> art_sign;
    std::vector<int> art_row;
    for (int i = 0; i < m_; ++i) {
      const int s = ns_ + i;
      if (resid[i] >= lo_[s] && resid[i] <= hi_[s]) {
        basic_[i] = s;
        xB_[i] = resid[i];
        state_[s] = VarState::basic;
      } else {
        // clamp the slack to its nearest bound, cover the rest with an
        // artificial of the right sign
        const double sv = std::clamp(resid[i], lo_[s], hi_[s]);
        state_[s] = sv == lo_[s] ? VarState::at_lower : VarState::at_upper;
        x_nb_[s] = sv;
        art_row.push_back(i);
        art_sign.push_back(resid[i] - sv > 0.0 ? 1.0 : -1.0);
      }
    }
    n_art_ = static_cast<int>(art_row.size());
    if (n_art_ > 0) {
      A_.conservativeResize(m_, nv_ + n_art_);
      A_.rightCols(n_art_).setZero();
      lo_.conservativeResize(nv_ + n_art_);
      hi_.conservativeResize(nv_ + n_art_);
      cost_.conservativeResize(nv_ + n_art_);
      x_nb_.conservativeResize(nv_ + n_art_);
      for (int t = 0; t < n_art_; ++t) {
        const int col = nv_ + t;
        const int i = art_row[t];
        A_(i, col) = art_sign[t];
        lo_[col] = 0.0;
        hi_[col] = kInf;
        cost_[col] = 0.0;
        x_nb_[col] = 0.0;
        state_.push_back(VarState::basic);
        basic_[i] = col;
        xB_[i] = (resid[i] - x_nb_[ns_ + i]) / art_sign[t];
      }
      nv_ += n_art_;
    }
    Binv_ = Eigen::MatrixXd::Identity(m_, m_);
    refactor();
  }

  bool needs_phase1() const { return n_art_ > 0; }

  void set_phase1_costs() {
    active_cost_.setZero(nv_);
    for (int t = 0; t < n_art_; ++t) active_cost_[nv_ - n_art_ + t] = 1.0;
  }

  double phase1_objective() const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= nv_ - n_art_) v += xB_[i];
    return v;
  }

  // Pin artificials to zero for phase 2; those still basic sit at value 0
  // on redundant rows and can stay.
  void freeze_artificials() {
    for (int t = 0; t < n_art_; ++t) hi_[nv_ - n_art_ + t] = 0.0;
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basic_[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible())
      throw std::runtime_error("simplex basis became singular");
    Binv_ = lu.inverse();
    pivots_since_refactor_ = 0;
    recompute_basics();
  }

  void recompute_basics() {
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < nv_; ++j)
      if (state_[j] != VarState::basic && x_nb_[j] != 0.0)
        rhs -= A_.col(j) * x_nb_[j];
    xB_ = Binv_ * rhs;
  }

  Eigen::VectorXd duals() const {
    Eigen::VectorXd cB(m_);
    for (int i = 0; i < m_; ++i) cB[i] = active_cost_[basic_[i]];
    return Binv_.transpose() * cB;
  }

  // returns false when the phase-2 problem is unbounded
  bool iterate(bool phase1) {
    int stall = 0;
    double last_obj = current_objective();
    while (true) {
      if (++total_iters_ > kMaxIterations)
        throw std::runtime_error("simplex iteration limit exceeded");
      const Eigen::VectorXd y = duals();

      int enter = -1;
      double enter_dir = 0.0, best_score = kDualTol;
      for (int j = 0; j < nv_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (hi_[j] - lo_[j] <= 0.0) continue; // fixed variables never move
        const double dj = active_cost_[j] - y.dot(A_.col(j));
        double score = 0.0, dir = 0.0;
        if (state_[j] == VarState::at_lower && dj < -kDualTol) {
          score = -dj;
          dir = 1.0;
        } else if (state_[j] == VarState::at_upper && dj > kDualTol) {
          score = dj;
          dir = -1.0;
        } else if (state_[j] == VarState::free_zero &&
                   std::abs(dj) > kDualTol) {
          score = std::abs(dj);
          dir = dj < 0.0 ? 1.0 : -1.0;
        } else {
          continue;
        }
        if (bland_) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) return true; // optimal for the active costs

      const Eigen::VectorXd w = Binv_ * A_.col(enter);

      // Ratio test: how far `enter` can move before a basic variable hits
      // a bound. Near-ties are broken by smallest variable index so that
      // Bland mode terminates.
      auto row_limit = [&](int i, double* to) -> double {
        const double delta = -enter_dir * w[i];
        if (std::abs(delta) <= kPivotTol) return kInf;
        if (delta > 0.0) {
          if (!std::isfinite(hi_[basic_[i]])) return kInf;
          *to = hi_[basic_[i]];
          return std::max((hi_[basic_[i]] - xB_[i]) / delta, 0.0);
        }
        if (!std::isfinite(lo_[basic_[i]])) return kInf;
        *to = lo_[basic_[i]];
        return std::max((xB_[i] - lo_[basic_[i]]) / (-delta), 0.0);
      };
      double t_rows = kInf;
      for (int i = 0; i < m_; ++i) {
        double to = 0.0;
        t_rows = std::min(t_rows, row_limit(i, &to));
      }
      double own_span = kInf;
      if (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter]))
        own_span = hi_[enter] - lo_[enter];

      if (!std::isfinite(t_rows) && !std::isfinite(own_span)) {
        unbounded_var_ = enter;
        unbounded_dir_ = enter_dir;
        unbounded_w_ = w;
        return false;
      }
      const bool bound_flip = own_span < t_rows;
      const double t_max = bound_flip ? own_span : t_rows;
      int leave = -1;
      double leave_to = 0.0;
      if (!bound_flip) {
        for (int i = 0; i < m_; ++i) {
          double to = 0.0;
          const double limit = row_limit(i, &to);
          if (limit <= t_rows + 1e-12 &&
              (leave < 0 || basic_[i] < basic_[leave])) {
            leave = i;
            leave_to = to;
          }
        }
      }

      xB_ -= t_max * enter_dir * w;
      if (bound_flip) {
        state_[enter] = state_[enter] == VarState::at_lower
                            ? VarState::at_upper
                            : VarState::at_lower;
        x_nb_[enter] = rest_value(enter);
      } else {
        const double entering_value = x_nb_[enter] + t_max * enter_dir;
        const int out_var = basic_[leave];
        state_[out_var] =
            leave_to == lo_[out_var] ? VarState::at_lower : VarState::at_upper;
        x_nb_[out_var] = leave_to;
        basic_[leave] = enter;
        state_[enter] = VarState::basic;
        xB_[leave] = entering_value;
        update_inverse(w, leave);
      }

      const double obj = current_objective();
      if (obj < last_obj - 1e-12) {
        stall = 0;
        last_obj = obj;
      } else if (++stall > kStallLimit) {
        bland_ = true; // anti-cycling from here on
      }
      (void)phase1;
    }
  }

  void update_inverse(const Eigen::VectorXd& w, int r) {
    const double piv = w[r];
    if (std::abs(piv) <= kPivotTol || ++pivots_since_refactor_ >= kRefactorEvery) {
      refactor();
      return;
    }
    const Eigen::RowVectorXd pivot_row = Binv_.row(r) / piv;
    for (int i = 0; i < m_; ++i)
      if (i != r) Binv_.row(i) -= w[i] * pivot_row;
    Binv_.row(r) = pivot_row;
  }

  double current_objective() const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i) v += active_cost_[basic_[i]] * xB_[i];
    for (int j = 0; j < nv_; ++j)
      if (state_[j] != VarState::basic) v += active_cost_[j] * x_nb_[j];
    return v;
  }

  Eigen::VectorXd full_point() const {
    Eigen::VectorXd x(nv_);
    for (int j = 0; j < nv_; ++j) x[j] = x_nb_[j];
    for (int i = 0; i < m_; ++i) x[basic_[i]] = xB_[i];
    return x;
  }

  LPSolution optimal_solution() {
    refactor(); // clean inverse before certifying
    LPSolution sol;
    sol.status = LPStatus::optimal;
    sol.iterations = total_iters_;
    const Eigen::VectorXd x = full_point();
    sol.primal = x.head(ns_);
    const Eigen::VectorXd y = duals();
    sol.dual = y;
    sol.objective = cost_.head(ns_).dot(sol.primal);

    Eigen::VectorXd resid = A_ * x - b_;
    double pr = resid.cwiseAbs().maxCoeff();
    for (int j = 0; j < nv_; ++j) {
      if (std::isfinite(lo_[j])) pr = std::max(pr, lo_[j] - x[j]);
      if (std::isfinite(hi_[j])) pr = std::max(pr, x[j] - hi_[j]);
    }
    sol.primal_residual = pr;

    double dr = 0.0, gap_terms = 0.0;
    for (int j = 0; j < nv_; ++j) {
      const double dj = active_cost_[j] - y.dot(A_.col(j));
      switch (state_[j]) {
        case VarState::basic: dr = std::max(dr, std::abs(dj)); break;
        case VarState::at_lower: dr = std::max(dr, -dj); break;
        case VarState::at_upper: dr = std::max(dr, dj); break;
        case VarState::free_zero: dr = std::max(dr, std::abs(dj)); break;
      }
      if (state_[j] != VarState::basic) gap_terms += dj * x[j];
    }
    sol.dual_residual = std::max(dr, 0.0);
    sol.duality_gap = cost_.dot(x) - (y.dot(b_) + gap_terms);
    return sol;
  }

  LPSolution infeasible_solution() {
    LPSolution sol;
    sol.status = LPStatus::infeasible;
    sol.iterations = total_iters_;
    // Farkas multipliers from the phase-1 duals; the orientation making
    // the certificate inequality strict is returned, with wrong-signed
    // round-off on inequality rows clamped away.
    Eigen::VectorXd y = duals();
    if (certificate_margin(y) < certificate_margin(-y)) y = -y;
    for (int i = 0; i < m_; ++i)
      if (hi_[ns_ + i] == kInf) y[i] = std::max(y[i], 0.0);
    sol.ray = y;
    sol.dual = y;
    return sol;
  }

  // How strictly y certifies infeasibility: min over the box of y'Ax
  // minus y'b (positive = certified).
  double certificate_margin(Eigen::VectorXd y) const {
    for (int i = 0; i < m_; ++i)
      if (hi_[ns_ + i] == kInf) y[i] = std::max(y[i], 0.0);
    double lhs = 0.0;
    for (int j = 0; j < ns_; ++j) {
      double g = 0.0;
      for (int i = 0; i < m_; ++i) g += y[i] * A_(i, j);
      if (std::abs(g) <= 1e-11) continue;
      const double at = g > 0.0 ? lo_[j] : hi_[j];
      if (!std::isfinite(at)) return -kInf;
      lhs += g * at;
    }
    return lhs - y.dot(b_);
  }

  LPSolution unbounded_solution() {
    LPSolution sol;
    sol.status = LPStatus::unbounded;
    sol.iterations = total_iters_;
    Eigen::VectorXd ray = Eigen::VectorXd::Zero(ns_);
    if (unbounded_var_ < ns_) ray[unbounded_var_] = unbounded_dir_;
    for (int i = 0; i < m_; ++i)
      if (basic_[i] < ns_) ray[basic_[i]] = -unbounded_dir_ * unbounded_w_[i];
    sol.ray = ray;
    const Eigen::VectorXd x = full_point();
    sol.primal = x.head(ns_);
    sol.objective = -kInf;
    return sol;
  }
};

void validate(const LPProblem& p) {
  const int n = static_cast<int>(p.objective.size());
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("bounds length must match objective length");
  for (int j = 0; j < n; ++j)
    if (!std::isfinite(p.objective[j]))
      throw std::invalid_argument("objective entries must be finite");
  for (const auto& row : p.rows) {
    if (row.coeffs.size() != n)
      throw std::invalid_argument("constraint row has wrong length");
    if (!row.coeffs.allFinite() || !std::isfinite(row.rhs))
      throw std::invalid_argument("constraint entries must be finite");
  }
  for (int j = 0; j < n; ++j)
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]))
      throw std::invalid_argument("bounds must not be NaN");
}

} // namespace

LPSolution solve_lp(const LPProblem& problem) {
  validate(problem);
  const int n = static_cast<int>(problem.objective.size());

  if (problem.rows.empty()) {
    // pure box problem
    LPSolution sol;
    sol.primal.setZero(n);
    for (int j = 0; j < n; ++j) {
      if (problem.lower[j] > problem.upper[j]) {
        sol.status = LPStatus::infeasible;
        return sol;
      }
      const double c = problem.objective[j];
      double v;
      if (c > 0.0)
        v = problem.lower[j];
      else if (c < 0.0)
        v = problem.upper[j];
      else
        v = std::isfinite(problem.lower[j])
                ? std::min(std::max(0.0, problem.lower[j]), problem.upper[j])
                : std::max(std::min(0.0, problem.upper[j]), problem.lower[j]);
      if (!std::isfinite(v)) {
        sol.status = LPStatus::unbounded;
        sol.ray.setZero(n);
        sol.ray[j] = c > 0.0 ? -1.0 : 1.0;
        return sol;
      }
      sol.primal[j] = v;
    }
    sol.status = LPStatus::optimal;
    sol.objective = problem.objective.dot(sol.primal);
    return sol;
  }

  Simplex s(problem);
  return s.run();
}

LPProblem build_dantzig_lp(const Eigen::MatrixXd& H, const Eigen::VectorXd& Y,
                           double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
  if (H.rows() != Y.size())
    throw std::invalid_argument("design and response sizes differ");
  const int n = static_cast<int>(H.rows());
  const int N = static_cast<int>(H.cols());
  const Eigen::MatrixXd G = H.transpose() * H / double(n);
  const Eigen::VectorXd z = H.transpose() * Y / double(n);

  LPProblem p;
  p.objective.setZero(2 * N);
  p.objective.tail(N).setOnes();
  p.lower.setConstant(2 * N, -kInf);
  p.upper.setConstant(2 * N, kInf);
  p.lower.tail(N).setZero();

  p.rows.reserve(4 * N);
  for (int k = 0; k < N; ++k) {
    LPConstraint up, dn;
    up.coeffs.setZero(2 * N);
    up.coeffs[k] = 1.0;
    up.coeffs[N + k] = -1.0;
    up.rhs = 0.0;
    dn.coeffs.setZero(2 * N);
    dn.coeffs[k] = -1.0;
    dn.coeffs[N + k] = -1.0;
    dn.rhs = 0.0;
    p.rows.push_back(std::move(up));
    p.rows.push_back(std::move(dn));
  }
  for (int k = 0; k < N; ++k) {
    LPConstraint up, dn;
    up.coeffs.setZero(2 * N);
    up.coeffs.head(N) = G.row(k).transpose();
    up.rhs = z[k] + epsilon;
    dn.coeffs.setZero(2 * N);
    dn.coeffs.head(N) = -G.row(k).transpose();
    dn.rhs = -(z[k] - epsilon);
    p.rows.push_back(std::move(up));
    p.rows.push_back(std::move(dn));
  }
  return p;
}

std::string dump_lp(const LPProblem& p) {
  std::ostringstream os;
  os.precision(17);
  os << "minimize\n";
  for (int j = 0; j < p.objective.size(); ++j)
    os << p.objective[j] << (j + 1 < p.objective.size() ? " " : "\n");
  os << "subject to\n";
  for (const auto& row : p.rows) {
    for (int j = 0; j < row.coeffs.size(); ++j) os << row.coeffs[j] << " ";
    os << (row.rel == Relation::le ? "<=" : "==") << " " << row.rhs << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < p.objective.size(); ++j)
    os << p.lower[j] << " " << p.upper[j] << "\n";
  return os.str();
}

} // namespace sparselab
