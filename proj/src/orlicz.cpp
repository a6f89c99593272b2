#include "sparselab/orlicz.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace sparselab {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Smallest C with expect(C) <= 1, expect nonincreasing in C.
OrliczNorm bisect(const std::function<double(double)>& expect,
                  double rel_tol) {
  double hi = 1.0;
  int guard = 0;
  while (expect(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 600) return {true, 0.0};
  }
  double lo = hi * 0.5;
  while (lo > 1e-300 && expect(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
  }
  if (lo <= 1e-300) return {false, 0.0}; // eta vanishes
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (expect(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return {false, hi};
}

double psi_of(Psi psi, double x) {
  return psi == Psi::psi1 ? std::expm1(x) : std::expm1(x * x);
}

} // namespace

OrliczNorm orlicz_norm(const Eigen::VectorXd& sample, Psi psi,
                       double rel_tol) {
  if (sample.size() == 0)
    throw std::invalid_argument("orlicz_norm needs a nonempty sample");
  if (sample.cwiseAbs().maxCoeff() == 0.0) return {false, 0.0};
  auto expect = [&](double c) {
    double acc = 0.0;
    for (int i = 0; i < sample.size(); ++i) {
      acc += psi_of(psi, std::abs(sample[i]) / c);
      if (!std::isfinite(acc)) return std::numeric_limits<double>::infinity();
    }
    return acc / static_cast<double>(sample.size());
  };
  return bisect(expect, rel_tol);
}

OrliczNorm orlicz_norm_normal(double sigma, Psi psi, double rel_tol) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (sigma == 0.0) return {false, 0.0};
  if (psi == Psi::psi2) {
    auto expect = [&](double c) {
      const double r = 2.0 * sigma * sigma / (c * c);
      if (r >= 1.0) return std::numeric_limits<double>::infinity();
      return 1.0 / std::sqrt(1.0 - r) - 1.0;
    };
    return bisect(expect, rel_tol);
  }
  auto expect = [&](double c) {
    const double t = sigma / c;
    // E exp(t|Z|) = 2 exp(t^2/2) Phi(t)
    return 2.0 * std::exp(0.5 * t * t) * normal_cdf(t) - 1.0;
  };
  return bisect(expect, rel_tol);
}

OrliczNorm orlicz_norm_exponential(double rate, Psi psi, double rel_tol) {
  if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
  if (psi == Psi::psi2) return {true, 0.0}; // E exp(eta^2/C^2) diverges
  auto expect = [&](double c) {
    const double t = 1.0 / c;
    if (t >= rate) return std::numeric_limits<double>::infinity();
    return rate / (rate - t) - 1.0;
  };
  return bisect(expect, rel_tol);
}

double product_psi1_bound(double norm2_a, double norm2_b) {
  return norm2_a * norm2_b;
}

} // namespace sparselab
