#pragma once

// Finite-n moments of K_n and K_{r,n} in closed form.
//
// Two backends share the formulas:
//   * MomentEngine: double precision. Generalized factorial coefficients are
//     kept as logarithms so n in the thousands neither overflows nor
//     cancels. Built once per (n_max, alpha), then queried for any theta.
//   * exact::*: any exact field (Rational), alpha and theta rational.
//
// The weight (theta/alpha)^{(k)} / (theta)^{(n)} is always evaluated in the
// form (1/alpha) (theta/alpha + 1)^{(k-1)} / (theta + 1)^{(n-1)}, which is
// the same number for theta != 0 and stays finite at theta = 0.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ewpitman/numerics.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/sibuya.hpp"

namespace ewpitman {

class MomentEngine {
 public:
  MomentEngine(std::int64_t n_max, double alpha) : alpha_(alpha), tri_(n_max, alpha) {}

  std::int64_t n_max() const { return tri_.n_max(); }
  double alpha() const { return alpha_; }
  const GfcLogTriangle& triangle() const { return tri_; }

  /// log of (theta/alpha)^{(k)} / (theta)^{(n)} for k, n >= 1.
  double log_weight(std::int64_t n, std::int64_t k, double theta) const {
    check_theta(theta);
    const LogScalar w = LogScalar::from_value(1.0 / alpha_) * rising_factorial(theta / alpha_ + 1.0, k - 1) /
                        rising_factorial(theta + 1.0, n - 1);
    return w.log_abs();
  }

  double pmf_K(std::int64_t n, std::int64_t k, double theta) const {
    check_n(n);
    if (k < 1 || k > n) return 0.0;
    return std::exp(log_weight(n, k, theta) + tri_.log_at(n, k));
  }

  std::vector<double> pmf_K_row(std::int64_t n, double theta) const {
    std::vector<double> row(n + 1, 0.0);
    for (std::int64_t k = 1; k <= n; ++k) row[k] = pmf_K(n, k, theta);
    return row;
  }

  /// E[(K_m + shift)^q] under (alpha, theta), any integer q. m = 0 means the
  /// empty partition, K_0 = 0.
  double shifted_power_mean(std::int64_t m, std::int64_t shift, int q, double theta) const {
    if (m == 0) {
      if (shift == 0 && q < 0) throw std::domain_error("shifted_power_mean: 0^q with q < 0");
      return int_power<double>(static_cast<double>(shift), q);
    }
    double acc = 0.0;
    for (std::int64_t l = 1; l <= m; ++l) acc += int_power<double>(static_cast<double>(l + shift), q) * pmf_K(m, l, theta);
    return acc;
  }

  /// E[K_{r,n}^p K_n^q]: sum over i of S(p,i) p_alpha(r)^i (n)_{(ir)}
  /// (theta/alpha)^{(i)} (theta + i alpha)^{(n - ir)} / (theta)^{(n)}
  /// E[(K*_{n-ir} + i)^q], with K* under (alpha, theta + i alpha).
  double joint_moment(std::int64_t n, int r, int p, int q, double theta) const {
    check_n(n);
    if (r < 1 || p < 0) throw std::domain_error("joint_moment: need r >= 1 and p >= 0");
    if (static_cast<std::int64_t>(p) * r > n) throw std::domain_error("joint_moment: p r > n");
    check_theta(theta);
    if (p == 0) return shifted_power_mean(n, 0, q, theta);
    const SibuyaDist sib(alpha_);
    const double log_pr = sib.log_pmf(r);
    double acc = 0.0;
    for (int i = 1; i <= p; ++i) {
      const double s2 = to_double(stirling2(p, i));
      if (s2 == 0.0) continue;
      const std::int64_t m = n - static_cast<std::int64_t>(i) * r;
      const LogScalar w = LogScalar::from_value(1.0 / alpha_) * rising_factorial(theta / alpha_ + 1.0, i - 1) *
                          rising_factorial(theta + i * alpha_, m) / rising_factorial(theta + 1.0, n - 1) *
                          falling_factorial(static_cast<double>(n), static_cast<std::int64_t>(i) * r);
      const double coef = std::exp(w.log_abs() + i * log_pr);
      acc += s2 * coef * shifted_power_mean(m, i, q, theta + i * alpha_);
    }
    return acc;
  }

  /// E[K_{r,n}^p | K_n = k] = (1/C(n,k)) sum_i S(p,i) p_alpha(r)^i (n)_{(ir)} C(n - ir, k - i).
  double conditional_moment_Kr(std::int64_t n, std::int64_t k, int r, int p) const {
    check_n(n);
    if (k < 1 || k > n) throw std::domain_error("conditional_moment_Kr: need 1 <= k <= n");
    if (r < 1 || p < 0) throw std::domain_error("conditional_moment_Kr: need r >= 1 and p >= 0");
    if (p == 0) return 1.0;
    const double log_norm = tri_.log_at(n, k);
    const double log_pr = SibuyaDist(alpha_).log_pmf(r);
    double acc = 0.0;
    for (int i = 1; i <= p; ++i) {
      const std::int64_t m = n - static_cast<std::int64_t>(i) * r;
      if (m < 0 || k - i < 0 || k - i > m) continue;
      const double log_c = tri_.log_at(m, k - i);
      if (log_c == -std::numeric_limits<double>::infinity()) continue;
      const double log_term =
          i * log_pr + falling_factorial(static_cast<double>(n), static_cast<std::int64_t>(i) * r).log_abs() + log_c -
          log_norm;
      acc += to_double(stirling2(p, i)) * std::exp(log_term);
    }
    return acc;
  }

  /// P(X_1 + ... + X_k = n) for iid Sibuya X = C(n,k;alpha) k!/n!.
  double sibuya_sum_pmf(std::int64_t k, std::int64_t n) const {
    check_n(n);
    if (k < 1) throw std::domain_error("sibuya_sum_pmf: k must be >= 1");
    if (k > n) return 0.0;
    return std::exp(tri_.log_at(n, k) + log_factorial(k) - log_factorial(n));
  }

 private:
  void check_n(std::int64_t n) const {
    if (n < 1) throw std::domain_error("MomentEngine: n must be >= 1");
    if (n > tri_.n_max()) throw std::out_of_range("MomentEngine: n exceeds the cached triangle");
  }
  void check_theta(double theta) const {
    if (!(theta > -alpha_)) throw std::invalid_argument("MomentEngine: theta must exceed -alpha");
  }

  double alpha_;
  GfcLogTriangle tri_;
};

inline void require_moment_params(const ModelParams& params) {
  params.validate();
  if (params.alpha == 0.0) throw std::invalid_argument("exact moments need alpha > 0 (the Ewens case is not covered)");
}

inline double pmf_K(std::int64_t n, std::int64_t k, const ModelParams& params) {
  require_moment_params(params);
  return MomentEngine(n, params.alpha).pmf_K(n, k, params.theta);
}

/// E[K_n] = (theta/alpha) ((alpha+theta)^{(n)} / (theta)^{(n)} - 1).
inline double mean_K(std::int64_t n, const ModelParams& params) {
  require_moment_params(params);
  if (n < 1) throw std::domain_error("mean_K: n must be >= 1");
  const double a = params.alpha;
  const double t = params.theta;
  if (t == 0.0) {
    // limit theta -> 0: (alpha)^{(n)} / (alpha (n-1)!)
    return std::exp(rising_factorial(a, n).log_abs() - std::log(a) - log_factorial(n - 1));
  }
  const LogScalar ratio = rising_factorial(a + t, n) / rising_factorial(t, n);
  return t / a * (ratio.value() - 1.0);
}

/// E[K_{r,n}] = p_alpha(r) (n)_{(r)} (theta/alpha) (alpha+theta)^{(n-r)} / (theta)^{(n)}.
inline double mean_Kr(std::int64_t n, int r, const ModelParams& params) {
  require_moment_params(params);
  if (n < 1 || r < 1) throw std::domain_error("mean_Kr: n and r must be >= 1");
  if (r > n) return 0.0;
  const double a = params.alpha;
  const double t = params.theta;
  const LogScalar w = LogScalar::from_value(1.0 / a) * falling_factorial(static_cast<double>(n), r) *
                      rising_factorial(a + t, n - r) / rising_factorial(t + 1.0, n - 1);
  return std::exp(w.log_abs() + SibuyaDist(a).log_pmf(r));
}

/// E[(K_{r,n})_{(p)}] = p_alpha(r)^p (n)_{(pr)} (theta/alpha)^{(p)} (p alpha + theta)^{(n-pr)} / (theta)^{(n)}.
inline double factorial_moment_Kr(std::int64_t n, int r, int p, const ModelParams& params) {
  require_moment_params(params);
  if (n < 1 || r < 1 || p < 1) throw std::domain_error("factorial_moment_Kr: n, r, p must be >= 1");
  const std::int64_t pr = static_cast<std::int64_t>(p) * r;
  if (pr > n) return 0.0;
  const double a = params.alpha;
  const double t = params.theta;
  const LogScalar w = LogScalar::from_value(1.0 / a) * rising_factorial(t / a + 1.0, p - 1) *
                      falling_factorial(static_cast<double>(n), pr) * rising_factorial(p * a + t, n - pr) /
                      rising_factorial(t + 1.0, n - 1);
  return std::exp(w.log_abs() + p * SibuyaDist(a).log_pmf(r));
}

inline double joint_moment(std::int64_t n, int r, int p, int q, const ModelParams& params) {
  require_moment_params(params);
  return MomentEngine(n, params.alpha).joint_moment(n, r, p, q, params.theta);
}

inline double conditional_moment_Kr(std::int64_t n, std::int64_t k, int r, int p, const ModelParams& params) {
  require_moment_params(params);
  return MomentEngine(n, params.alpha).conditional_moment_Kr(n, k, r, p);
}

inline double sibuya_sum_pmf(std::int64_t k, std::int64_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("sibuya_sum_pmf: alpha must lie in (0,1)");
  if (k >= 1 && k > n) return 0.0;
  return MomentEngine(n, alpha).sibuya_sum_pmf(k, n);
}

/// E[Q_{r,n}^2] = E[K_{r,n}^2 / K_n] - 2 p E[K_{r,n}] + p^2 E[K_n], p = p_alpha(r).
inline double second_moment_q(const MomentEngine& engine, std::int64_t n, int r, double theta) {
  const double p = SibuyaDist(engine.alpha()).pmf(r);
  const double m2 = engine.joint_moment(n, r, 2, -1, theta);
  const double m1 = engine.joint_moment(n, r, 1, 0, theta);
  const double m0 = engine.joint_moment(n, r, 0, 1, theta);
  return m2 - 2.0 * p * m1 + p * p * m0;
}

inline double second_moment_q(std::int64_t n, int r, const ModelParams& params) {
  require_moment_params(params);
  return second_moment_q(MomentEngine(n, params.alpha), n, r, params.theta);
}

/// E[Q_{r,n}] = sum_k P(K_n = k) sqrt(k) (E[K_{r,n} | K_n = k] / k - p). Not zero
/// at finite n: it decays like n^{-alpha/2}.
inline double mean_q(const MomentEngine& engine, std::int64_t n, int r, double theta) {
  const double p = SibuyaDist(engine.alpha()).pmf(r);
  double acc = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double w = engine.pmf_K(n, k, theta);
    if (w == 0.0) continue;
    const double kd = static_cast<double>(k);
    acc += w * std::sqrt(kd) * (engine.conditional_moment_Kr(n, k, r, 1) / kd - p);
  }
  return acc;
}

inline double mean_q(std::int64_t n, int r, const ModelParams& params) {
  require_moment_params(params);
  return mean_q(MomentEngine(n, params.alpha), n, r, params.theta);
}

namespace exact {

template <class T>
struct Params {
  T alpha;
  T theta;

  void validate() const {
    if (!(alpha > T(0) && alpha < T(1))) throw std::invalid_argument("exact::Params: alpha must lie in (0,1)");
    if (!(theta > -alpha)) throw std::invalid_argument("exact::Params: theta must exceed -alpha");
  }
};

using RationalParams = Params<Rational>;

inline RationalParams parse_params(const std::string& alpha, const std::string& theta) {
  RationalParams p{parse_rational(alpha), parse_rational(theta)};
  p.validate();
  return p;
}

/// (theta/alpha)^{(k)} / (theta)^{(n)} in the theta = 0 safe form.
template <class T>
T weight(std::int64_t n, std::int64_t k, const Params<T>& par) {
  return rising_power<T>(par.theta / par.alpha + T(1), k - 1) / par.alpha /
         rising_power<T>(par.theta + T(1), n - 1);
}

template <class T>
class Engine {
 public:
  Engine(std::int64_t n_max, Params<T> par) : par_(std::move(par)), tri_(n_max, par_.alpha) { par_.validate(); }

  const Params<T>& params() const { return par_; }
  const GfcTriangle<T>& triangle() const { return tri_; }

  T pmf_K(std::int64_t n, std::int64_t k) const { return pmf_K_with(n, k, par_.theta); }

  T pmf_K_with(std::int64_t n, std::int64_t k, const T& theta) const {
    if (k < 1 || k > n) return T(0);
    return weight<T>(n, k, Params<T>{par_.alpha, theta}) * tri_.at(n, k);
  }

  T shifted_power_mean(std::int64_t m, std::int64_t shift, int q, const T& theta) const {
    if (m == 0) {
      if (shift == 0 && q < 0) throw std::domain_error("shifted_power_mean: 0^q with q < 0");
      return int_power<T>(T(shift), q);
    }
    T acc(0);
    for (std::int64_t l = 1; l <= m; ++l) acc += int_power<T>(T(l + shift), q) * pmf_K_with(m, l, theta);
    return acc;
  }

  T mean_K(std::int64_t n) const {
    const T& a = par_.alpha;
    const T& t = par_.theta;
    if (t == T(0)) return rising_power<T>(a, n) / a / factorial_as<T>(n - 1);
    return t / a * (rising_power<T>(a + t, n) / rising_power<T>(t, n) - T(1));
  }

  T mean_Kr(std::int64_t n, int r) const { return factorial_moment_Kr(n, r, 1); }

  T factorial_moment_Kr(std::int64_t n, int r, int p) const {
    const std::int64_t pr = static_cast<std::int64_t>(p) * r;
    if (pr > n) return T(0);
    const T& a = par_.alpha;
    const T& t = par_.theta;
    return int_power<T>(sibuya_pmf<T>(a, r), p) * falling_power<T>(T(n), pr) *
           rising_power<T>(t / a + T(1), p - 1) / a * rising_power<T>(T(p) * a + t, n - pr) /
           rising_power<T>(t + T(1), n - 1);
  }

  T joint_moment(std::int64_t n, int r, int p, int q) const {
    if (static_cast<std::int64_t>(p) * r > n) throw std::domain_error("joint_moment: p r > n");
    if (p == 0) return shifted_power_mean(n, 0, q, par_.theta);
    const T& a = par_.alpha;
    const T& t = par_.theta;
    const T pr = sibuya_pmf<T>(a, r);
    T acc(0);
    for (int i = 1; i <= p; ++i) {
      const std::int64_t m = n - static_cast<std::int64_t>(i) * r;
      const T coef = T(stirling2(p, i)) * int_power<T>(pr, i) * falling_power<T>(T(n), static_cast<std::int64_t>(i) * r) *
                     rising_power<T>(t / a + T(1), i - 1) / a * rising_power<T>(t + T(i) * a, m) /
                     rising_power<T>(t + T(1), n - 1);
      acc += coef * shifted_power_mean(m, i, q, t + T(i) * a);
    }
    return acc;
  }

  T conditional_moment_Kr(std::int64_t n, std::int64_t k, int r, int p) const {
    if (k < 1 || k > n) throw std::domain_error("conditional_moment_Kr: need 1 <= k <= n");
    if (p == 0) return T(1);
    const T pr = sibuya_pmf<T>(par_.alpha, r);
    T acc(0);
    for (int i = 1; i <= p; ++i) {
      const std::int64_t m = n - static_cast<std::int64_t>(i) * r;
      if (m < 0 || k - i < 0 || k - i > m) continue;
      acc += T(stirling2(p, i)) * int_power<T>(pr, i) * falling_power<T>(T(n), static_cast<std::int64_t>(i) * r) *
             tri_.at(m, k - i);
    }
    return acc / tri_.at(n, k);
  }

 private:
  Params<T> par_;
  GfcTriangle<T> tri_;
};

/// P(S_k = n) by the alternating sum (1/n!) sum_i (-1)^i C(k,i) (-i alpha)^{(n)}.
template <class T>
T sibuya_sum_pmf(std::int64_t k, std::int64_t n, const T& alpha) {
  if (k > n) return T(0);
  T acc(0);
  for (std::int64_t i = 0; i <= k; ++i) {
    T term = binomial_as<T>(k, i) * rising_power<T>(-T(i) * alpha, n);
    acc += (i % 2 == 0) ? term : T(-term);
  }
  return acc / factorial_as<T>(n);
}

}  // namespace exact

}  // namespace ewpitman
