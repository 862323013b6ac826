#pragma once

// Martingales built from the block counts.
//
//   S_{r,n} = sum_{i<=r} b_{r,i} K_{i,n} + (-1)^r p_alpha(r) K_n
//   M_{r,n} = a_{r,n} (S_{r,n} + (-1)^r p_alpha(r) theta / alpha)
//   b_{r,i} = (-1)^{r-i} (i - alpha)^{(r-i)} / (r-i)!
//   a_{r,n} = prod_{k=r}^{n-1} (k + theta) / (k + alpha + theta - r),  a_{r,n} = 1 for n <= r
//
// E[M_{r,n+1} | F_n] = M_{r,n} holds for n >= r. Below r the normaliser is
// frozen at one and the conditional mean contracts by gamma_{r,n}.
//
// Everything is templated on the scalar so the same code runs in double, in
// extended precision, and in exact rationals.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ewpitman/numerics.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/sibuya.hpp"

namespace ewpitman {

/// (b_{r,1}, ..., b_{r,r}).
template <class T>
std::vector<T> coeff_b(int r, const T& alpha) {
  if (r < 1) throw std::domain_error("coeff_b: r must be >= 1");
  std::vector<T> b(r);
  for (int i = 1; i <= r; ++i) {
    T v = rising_power<T>(T(i) - alpha, r - i) / factorial_as<T>(r - i);
    b[i - 1] = ((r - i) % 2 == 0) ? v : T(-v);
  }
  return b;
}

/// a_{r,n} in log space.
inline LogScalar coeff_a(int r, std::int64_t n, const ModelParams& params) {
  if (r < 1 || n < 1) throw std::domain_error("coeff_a: r and n must be >= 1");
  if (n <= r) return LogScalar::one();
  try {
    return rising_ratio(r + params.theta, params.alpha + params.theta, n - r);
  } catch (const std::domain_error&) {
    throw std::domain_error("coeff_a: singular normaliser (k + alpha + theta - r = 0)");
  }
}

template <class T>
T coeff_a_exact(int r, std::int64_t n, const T& alpha, const T& theta) {
  if (n <= r) return T(1);
  const T den = rising_power<T>(alpha + theta, n - r);
  if (den == T(0)) throw std::domain_error("coeff_a_exact: singular normaliser");
  return rising_power<T>(T(r) + theta, n - r) / den;
}

/// Limit of a_{r,n} / n^{r-alpha}: Gamma(alpha+theta) / Gamma(r+theta).
inline double coeff_a_limit(int r, const ModelParams& params) {
  params.require_asymptotic("coeff_a_limit");
  return std::exp(std::lgamma(params.alpha + params.theta) - std::lgamma(r + params.theta));
}

/// (theta+1)^{(n-1)} / (alpha+theta-r+1)^{(n-1)}: the product started at k = 1.
/// Equal to a_{r,n} for r = 1 and a constant multiple of it for n >= r.
inline LogScalar coeff_a_from_one(int r, std::int64_t n, const ModelParams& params) {
  try {
    return rising_ratio(params.theta + 1.0, params.alpha + params.theta - r + 1.0, n - 1);
  } catch (const std::domain_error&) {
    throw std::domain_error("coeff_a_from_one: singular normaliser");
  }
}

/// Limit of coeff_a_from_one / n^{r-alpha}: Gamma(alpha+theta-r+1) / Gamma(theta+1).
inline double coeff_a_from_one_limit(int r, const ModelParams& params) {
  return std::tgamma(params.alpha + params.theta - r + 1.0) / std::tgamma(params.theta + 1.0);
}

/// gamma_{r,n} = 1 - (r - alpha)/(n + theta).
template <class T>
T contraction(int r, std::int64_t n, const T& alpha, const T& theta) {
  return T(1) - (T(r) - alpha) / (T(n) + theta);
}

/// The coefficient set of one martingale M_r under fixed (alpha, theta).
template <class T>
class MartingaleCoeffs {
 public:
  MartingaleCoeffs(int r, T alpha, T theta) : r_(r), alpha_(std::move(alpha)), theta_(std::move(theta)) {
    if (r < 1) throw std::domain_error("MartingaleCoeffs: r must be >= 1");
    if (!(alpha_ > T(0) && alpha_ < T(1))) throw std::invalid_argument("MartingaleCoeffs: alpha must lie in (0,1)");
    b_ = coeff_b<T>(r, alpha_);
    p_r_ = sibuya_pmf<T>(alpha_, r);
    signed_p_r_ = (r % 2 == 0) ? p_r_ : T(-p_r_);
    offset_ = signed_p_r_ * theta_ / alpha_;
  }

  int r() const { return r_; }
  const T& alpha() const { return alpha_; }
  const T& theta() const { return theta_; }
  const std::vector<T>& b() const { return b_; }
  const T& p_r() const { return p_r_; }
  /// (-1)^r p_alpha(r) theta / alpha.
  const T& offset() const { return offset_; }

  T a(std::int64_t n) const {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(coeff_a(r_, n, ModelParams{static_cast<double>(alpha_), static_cast<double>(theta_)}).value());
    } else {
      return coeff_a_exact<T>(r_, n, alpha_, theta_);
    }
  }

  T S(const CountsView& s) const {
    T acc = signed_p_r_ * T(s.k_total);
    for (int i = 1; i <= r_; ++i) acc += b_[i - 1] * T(s.count(i));
    return acc;
  }

  T M(const CountsView& s) const { return a(s.n) * (S(s) + offset_); }
  T M_with(const CountsView& s, const T& a_n) const { return a_n * (S(s) + offset_); }

  /// a_{r,n} (sum |b_i| K_i + p_r K + |offset|): the size of the terms that
  /// cancel inside M, used to express errors relative to the arithmetic.
  T magnitude(const CountsView& s, const T& a_n) const {
    T acc = p_r_ * T(s.k_total) + abs_of(offset_);
    for (int i = 1; i <= r_; ++i) acc += abs_of(b_[i - 1]) * T(s.count(i));
    return abs_of(a_n) * acc;
  }

  /// Exact conditional mean of M_{r,n+1} given the current histogram:
  /// enumerates the new-block move and one join move per occupied size.
  T one_step_expectation(const CountsView& s) const {
    std::vector<std::int64_t> c(s.counts.begin(), s.counts.end());
    if (c.empty()) c.push_back(0);
    c.resize(c.size() + 1, 0);
    const T a_next = a(s.n + 1);
    const T denom = T(s.n) + theta_;
    auto next_view = [&](std::int64_t k) { return CountsView{s.n + 1, k, std::span<const std::int64_t>(c)}; };

    c[1] += 1;
    T total = (alpha_ * T(s.k_total) + theta_) / denom * M_with(next_view(s.k_total + 1), a_next);
    c[1] -= 1;

    for (std::int64_t size = 1; size < static_cast<std::int64_t>(c.size()) - 1; ++size) {
      if (c[size] == 0) continue;
      const T prob = T(c[size]) * (T(size) - alpha_) / denom;
      c[size] -= 1;
      c[size + 1] += 1;
      total += prob * M_with(next_view(s.k_total), a_next);
      c[size + 1] -= 1;
      c[size] += 1;
    }
    return total;
  }

 private:
  static T abs_of(const T& x) { return x < T(0) ? T(-x) : x; }

  int r_;
  T alpha_;
  T theta_;
  std::vector<T> b_;
  T p_r_;
  T signed_p_r_;
  T offset_;
};

inline double statistic_S(const CountsView& s, int r, const ModelParams& params) {
  params.require_asymptotic("statistic_S");
  return MartingaleCoeffs<double>(r, params.alpha, params.theta).S(s);
}

inline double statistic_M(const CountsView& s, int r, const ModelParams& params) {
  params.require_asymptotic("statistic_M");
  return MartingaleCoeffs<double>(r, params.alpha, params.theta).M(s);
}

inline double one_step_expectation(const CountsView& s, int r, const ModelParams& params) {
  params.require_asymptotic("one_step_expectation");
  return MartingaleCoeffs<double>(r, params.alpha, params.theta).one_step_expectation(s);
}

/// Follows one trajectory of M_r. Stores log a_{r,n} and S_{r,n}; M itself is
/// formed on demand. The realized quadratic variation sum (Delta M)^2 is kept
/// in linear scale, which is safe while a_{r,n}^2 stays below ~1e300
/// (r <= 8 up to n ~ 1e18).
class MartingaleTracker {
 public:
  MartingaleTracker(int r, const ModelParams& params) : coeffs_(r, params.alpha, params.theta), params_(params) {
    params.require_asymptotic("MartingaleTracker");
  }

  int r() const { return coeffs_.r(); }
  std::int64_t n() const { return n_; }
  double log_a() const { return log_a_; }
  double S() const { return s_; }
  double qv() const { return qv_; }

  double M() const { return n_ == 0 ? 0.0 : std::exp(log_a_) * (s_ + coeffs_.offset()); }

  /// M_{r,n} / n^{r-alpha}.
  double M_scaled() const {
    if (n_ == 0) return 0.0;
    return std::exp(log_a_ - exponent() * std::log(static_cast<double>(n_))) * (s_ + coeffs_.offset());
  }

  /// sum (Delta M)^2 / n^{2r-alpha}.
  double qv_normalized() const {
    if (n_ == 0) return 0.0;
    const double e = 2.0 * coeffs_.r() - params_.alpha;
    return qv_ / std::pow(static_cast<double>(n_), e);
  }

  void qv_track(double increment) { qv_ += increment * increment; }

  /// Moves the tracker to the state `s`. Consecutive calls must be one step
  /// apart for qv() to be the realized quadratic variation.
  void observe(const CountsView& s) {
    const double prev_m = M();
    const bool first = n_ == 0;
    if (first || s.n != n_ + 1) {
      log_a_ = coeff_a(coeffs_.r(), s.n, params_).log_abs();
    } else if (s.n > coeffs_.r()) {
      const double k = static_cast<double>(n_);
      log_a_ += std::log((k + params_.theta) / (k + params_.alpha + params_.theta - coeffs_.r()));
    }
    n_ = s.n;
    s_ = coeffs_.S(s);
    if (!first) qv_track(M() - prev_m);
  }

 private:
  double exponent() const { return coeffs_.r() - params_.alpha; }

  MartingaleCoeffs<double> coeffs_;
  ModelParams params_;
  std::int64_t n_ = 0;
  double log_a_ = 0.0;
  double s_ = 0.0;
  double qv_ = 0.0;
};

/// Mean of the alpha-diversity: E[S_{alpha,theta}] = Gamma(theta+1) / (alpha Gamma(alpha+theta)).
inline double alpha_diversity_mean(const ModelParams& params) {
  params.require_asymptotic("alpha_diversity_mean");
  return std::exp(std::lgamma(params.theta + 1.0) - std::lgamma(params.alpha + params.theta)) / params.alpha;
}

/// Limit of E[sum (Delta M_r)^2] / n^{2r-alpha} for the normaliser used here:
/// p_alpha(r) (r-alpha)^{(r)}/r! (Gamma(alpha+theta)/Gamma(r+theta))^2 E[S_{alpha,theta}].
inline double qv_mean_limit(int r, const ModelParams& params) {
  const double p = SibuyaDist(params.alpha).pmf(r);
  const double lim_a = coeff_a_limit(r, params);
  const double rising = (rising_factorial(r - params.alpha, r).value()) / std::exp(log_factorial(r));
  return p * rising * lim_a * lim_a * alpha_diversity_mean(params);
}

// Algebraic identities behind the martingale property. Each returns a residual
// that vanishes exactly.

/// sum_i b_{r,i} p_alpha(i) + (-1)^r p_alpha(r).
template <class T>
T binomial_identity_residual(int r, const T& alpha) {
  const auto b = coeff_b<T>(r, alpha);
  T acc(0);
  for (int i = 1; i <= r; ++i) acc += b[i - 1] * sibuya_pmf<T>(alpha, i);
  const T p_r = sibuya_pmf<T>(alpha, r);
  return acc + ((r % 2 == 0) ? p_r : T(-p_r));
}

/// sum_i b_{r,i}^2 p_alpha(i) + p_alpha(r)^2 ((r-alpha)^{(r)} / (-alpha)^{(r)} - 1).
template <class T>
T squared_coefficient_residual(int r, const T& alpha) {
  const auto b = coeff_b<T>(r, alpha);
  T acc(0);
  for (int i = 1; i <= r; ++i) acc += b[i - 1] * b[i - 1] * sibuya_pmf<T>(alpha, i);
  const T p_r = sibuya_pmf<T>(alpha, r);
  const T ratio = rising_power<T>(T(r) - alpha, r) / rising_power<T>(-alpha, r);
  return acc + p_r * p_r * (ratio - T(1));
}

/// a_{r,n+1} gamma_{r,n} / a_{r,n} - 1, for n >= r.
inline double a_recursion_residual(int r, std::int64_t n, const ModelParams& params) {
  if (n < r) throw std::domain_error("a_recursion_residual: requires n >= r");
  const LogScalar lhs = coeff_a(r, n + 1, params) *
                        LogScalar::from_value(contraction<double>(r, n, params.alpha, params.theta));
  const LogScalar rhs = coeff_a(r, n, params);
  return (lhs / rhs).value() - 1.0;
}

}  // namespace ewpitman
