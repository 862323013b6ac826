#pragma once

// Self-normalized process P_{r,n} = K_{r,n}/K_n, the estimator
// alpha_hat = K_{1,n}/K_n with its normal-approximation interval, and the
// centred, sqrt(K_n)-scaled deviations Q_{r,n}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ewpitman/sampler.hpp"
#include "ewpitman/sibuya.hpp"

namespace ewpitman {

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, which brings the error near machine precision.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_quantile: p outside [0,1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// (K_{1,n}/K_n, ..., K_{d,n}/K_n).
inline std::vector<double> proportions(const CountsView& s, int d) {
  if (s.k_total < 1) throw std::invalid_argument("proportions: K_n must be >= 1");
  std::vector<double> out(d);
  for (int r = 1; r <= d; ++r) out[r - 1] = static_cast<double>(s.count(r)) / static_cast<double>(s.k_total);
  return out;
}

inline double alpha_hat(const CountsView& s) {
  if (s.k_total < 1) throw std::invalid_argument("alpha_hat: K_n must be >= 1");
  return static_cast<double>(s.count(1)) / static_cast<double>(s.k_total);
}

struct ConfidenceInterval {
  double center = 0.0;
  double low = 0.0;
  double high = 0.0;
  double gamma = 0.05;
  bool clipped = false;     // an endpoint left [0,1] and was moved back
  bool degenerate = false;  // alpha_hat in {0,1}: zero width

  bool contains(double x) const { return low <= x && x <= high; }
};

/// alpha_hat -/+ z_{1-gamma/2} sqrt(alpha_hat (1 - alpha_hat) / K_n), clipped to [0,1].
inline ConfidenceInterval alpha_ci(const CountsView& s, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("alpha_ci: gamma must lie in (0,1)");
  ConfidenceInterval ci;
  ci.gamma = gamma;
  ci.center = alpha_hat(s);
  ci.degenerate = ci.center == 0.0 || ci.center == 1.0;
  const double z = normal_quantile(1.0 - gamma / 2.0);
  const double half = z * std::sqrt(ci.center * (1.0 - ci.center) / static_cast<double>(s.k_total));
  ci.low = ci.center - half;
  ci.high = ci.center + half;
  if (ci.low < 0.0 || ci.high > 1.0) {
    ci.clipped = true;
    ci.low = std::max(ci.low, 0.0);
    ci.high = std::min(ci.high, 1.0);
  }
  return ci;
}

/// (sqrt(K_n) (P_{r,n} - p_alpha(r)))_{r=1..d}.
inline std::vector<double> q_vector(const CountsView& s, const ModelParams& params, int d) {
  params.require_asymptotic("q_vector");
  const auto p = SibuyaDist(params.alpha).pmf_table(d);
  const auto props = proportions(s, d);
  const double scale = std::sqrt(static_cast<double>(s.k_total));
  std::vector<double> q(d);
  for (int r = 1; r <= d; ++r) q[r - 1] = scale * (props[r - 1] - p[r]);
  return q;
}

struct SelfNormalizedSnapshot {
  std::int64_t n = 0;
  std::int64_t k_total = 0;
  std::vector<double> proportions;
  std::vector<double> q_vector;
};

inline SelfNormalizedSnapshot snapshot(const CountsView& s, const ModelParams& params, int d) {
  return SelfNormalizedSnapshot{s.n, s.k_total, proportions(s, d), q_vector(s, params, d)};
}

}  // namespace ewpitman
