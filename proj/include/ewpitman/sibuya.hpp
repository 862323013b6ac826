#pragma once

// The Sibuya distribution p_alpha(r) = alpha (1-alpha)^{(r-1)} / r!, r >= 1:
// the almost-sure limit of the block-size proportions of an Ewens-Pitman
// partition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ewpitman/numerics.hpp"
#include "ewpitman/random.hpp"

namespace ewpitman {

class SibuyaDist {
 public:
  /// Largest value the sampler will return before reporting overflow.
  static constexpr std::int64_t kSampleCap = std::int64_t{1} << 62;

  explicit SibuyaDist(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SibuyaDist: alpha must lie in (0,1)");
  }

  double alpha() const { return alpha_; }

  /// p(1) = alpha, p(r+1) = p(r) (r - alpha) / (r + 1).
  double pmf(std::int64_t r) const {
    if (r < 1) throw std::domain_error("SibuyaDist::pmf: r must be >= 1");
    double p = alpha_;
    for (std::int64_t k = 1; k < r; ++k) p *= (static_cast<double>(k) - alpha_) / static_cast<double>(k + 1);
    return p;
  }

  double log_pmf(std::int64_t r) const {
    if (r < 1) throw std::domain_error("SibuyaDist::log_pmf: r must be >= 1");
    return std::log(alpha_) + std::lgamma(static_cast<double>(r) - alpha_) - std::lgamma(1.0 - alpha_) -
           log_factorial(r);
  }

  /// P(X > r) = (1-alpha)^{(r)} / r!.
  double survival(std::int64_t r) const {
    if (r < 0) throw std::domain_error("SibuyaDist::survival: r must be >= 0");
    // Extended precision keeps the product within 1e-15 for r up to ~1e5.
    long double s = 1.0L;
    const long double a = alpha_;
    for (std::int64_t k = 1; k <= r; ++k) s *= 1.0L - a / static_cast<long double>(k);
    return static_cast<double>(s);
  }

  /// Gamma(r+1-alpha)/Gamma(r+1) via the delta ratio; a difference of two
  /// lgamma values would cancel badly for large r.
  double log_survival(std::int64_t r) const {
    if (r < 0) throw std::domain_error("SibuyaDist::log_survival: r must be >= 0");
    if (r == 0) return 0.0;
    const double x = static_cast<double>(r) + 1.0 - alpha_;
    return std::log(boost::math::tgamma_delta_ratio(x, alpha_)) - std::lgamma(1.0 - alpha_);
  }

  /// Entries 0..r_max with entry 0 set to zero, so table[r] = p(r).
  std::vector<double> pmf_table(std::int64_t r_max) const {
    std::vector<double> t(static_cast<std::size_t>(r_max) + 1, 0.0);
    if (r_max >= 1) t[1] = alpha_;
    for (std::int64_t r = 1; r < r_max; ++r) {
      t[r + 1] = t[r] * (static_cast<double>(r) - alpha_) / static_cast<double>(r + 1);
    }
    return t;
  }

  /// G(s) = 1 - (1-s)^alpha.
  double pgf(double s) const {
    if (!(std::fabs(s) < 1.0)) throw std::domain_error("SibuyaDist::pgf: |s| must be < 1");
    return -std::expm1(alpha_ * std::log1p(-s));
  }

  /// Inverse of the survival function: smallest r with survival(r) <= u.
  /// A sequential search covers the bulk; the heavy tail is located by
  /// galloping plus bisection on the log-survival.
  std::int64_t sample_from_uniform(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("SibuyaDist: uniform variate outside [0,1)");
    // X > r  <=>  U < survival(r), with U = 1 - u uniform on (0,1].
    const double v = 1.0 - u;
    double s = 1.0;
    for (std::int64_t r = 1; r <= kSequentialLimit; ++r) {
      s *= (static_cast<double>(r) - alpha_) / static_cast<double>(r);
      if (v >= s) return r;
    }
    const double log_v = std::log(v);
    std::int64_t lo = kSequentialLimit;  // survival(lo) > v
    std::int64_t hi = 2 * kSequentialLimit;
    while (log_survival(hi) > log_v) {
      lo = hi;
      if (hi > kSampleCap / 2) throw std::overflow_error("SibuyaDist: sample exceeds the 2^62 cap");
      hi *= 2;
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (log_survival(mid) > log_v) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  }

  template <class Gen>
  std::int64_t sample(Gen& gen) const {
    return sample_from_uniform(uniform01(gen));
  }

  /// min(X, r_max + 1): the tail cell is exact and never touches the cap,
  /// which matters for small alpha where X > 2^62 is not rare.
  std::int64_t sample_truncated_from_uniform(double u, std::int64_t r_max) const {
    if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("SibuyaDist: uniform variate outside [0,1)");
    if (r_max < 1) throw std::domain_error("SibuyaDist: r_max must be >= 1");
    const double v = 1.0 - u;
    const std::int64_t seq = std::min(r_max, kSequentialLimit);
    double s = 1.0;
    for (std::int64_t r = 1; r <= seq; ++r) {
      s *= (static_cast<double>(r) - alpha_) / static_cast<double>(r);
      if (v >= s) return r;
    }
    if (r_max <= kSequentialLimit) return r_max + 1;
    const double log_v = std::log(v);
    if (log_survival(r_max) > log_v) return r_max + 1;
    return sample_from_uniform(u);
  }

  template <class Gen>
  std::int64_t sample_truncated(Gen& gen, std::int64_t r_max) const {
    return sample_truncated_from_uniform(uniform01(gen), r_max);
  }

 private:
  static constexpr std::int64_t kSequentialLimit = 64;
  double alpha_;
};

/// Exact pmf for field types.
template <class T>
T sibuya_pmf(const T& alpha, std::int64_t r) {
  if (r < 1) throw std::domain_error("sibuya_pmf: r must be >= 1");
  return alpha * rising_power<T>(T(1) - alpha, r - 1) / factorial_as<T>(r);
}

/// G(st) - G(s)G(t) minus its expansion in powers of (1-s)^alpha, (1-t)^alpha
/// and (1-st)^alpha. Zero up to rounding.
inline double pgf_factorization_residual(const SibuyaDist& dist, double s, double t) {
  const double a = dist.alpha();
  const double lhs = dist.pgf(s * t) - dist.pgf(s) * dist.pgf(t);
  const double us = std::pow(1.0 - s, a);
  const double ut = std::pow(1.0 - t, a);
  const double ust = std::pow(1.0 - s * t, a);
  const double rhs = us + ut - ust - us * ut;
  return lhs - rhs;
}

}  // namespace ewpitman
