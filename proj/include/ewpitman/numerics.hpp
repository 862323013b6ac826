#pragma once

// Special-function kernel: rising/falling factorials, Stirling numbers of the
// second kind and generalized factorial coefficients.
//
// Two backends live side by side. The floating backend works in log space
// (LogScalar) so factorial ratios never overflow. The exact backend is a set of
// templates instantiated with Rational; it is the validation path for the
// floating code and the ground truth used by the oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace ewpitman {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Signed magnitude stored as (log|x|, sign). sign == 0 means exactly zero.
class LogScalar {
 public:
  constexpr LogScalar() = default;

  static constexpr LogScalar zero() { return LogScalar{}; }
  static constexpr LogScalar one() { return from_log(0.0, 1); }

  static constexpr LogScalar from_log(double log_abs, int sign = 1) {
    LogScalar s;
    s.log_abs_ = sign == 0 ? 0.0 : log_abs;
    s.sign_ = sign > 0 ? 1 : (sign < 0 ? -1 : 0);
    return s;
  }

  static LogScalar from_value(double x) {
    if (x == 0.0) return zero();
    return from_log(std::log(std::fabs(x)), x > 0 ? 1 : -1);
  }

  double log_abs() const { return log_abs_; }
  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }

  double value() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(log_abs_); }

  LogScalar& operator*=(const LogScalar& o) {
    if (sign_ == 0 || o.sign_ == 0) {
      *this = zero();
    } else {
      log_abs_ += o.log_abs_;
      sign_ *= o.sign_;
    }
    return *this;
  }

  LogScalar& operator/=(const LogScalar& o) {
    if (o.sign_ == 0) throw std::domain_error("LogScalar: division by zero");
    if (sign_ != 0) {
      log_abs_ -= o.log_abs_;
      sign_ *= o.sign_;
    }
    return *this;
  }

  friend LogScalar operator*(LogScalar a, const LogScalar& b) { return a *= b; }
  friend LogScalar operator/(LogScalar a, const LogScalar& b) { return a /= b; }

  LogScalar pow(unsigned k) const {
    if (k == 0) return one();
    if (sign_ == 0) return zero();
    return from_log(log_abs_ * k, (k % 2 == 1) ? sign_ : 1);
  }

 private:
  double log_abs_ = 0.0;
  int sign_ = 0;
};

namespace detail {

// Below this order the product is accumulated term by term; above it lgamma is
// used for the positive tail of the product.
inline constexpr std::int64_t kDirectProductLimit = 4096;

inline bool is_nonpositive_integer(double a) {
  return a <= 0.0 && std::floor(a) == a;
}

}  // namespace detail

/// a (a+1) ... (a+n-1), with the empty product equal to one.
inline LogScalar rising_factorial(double a, std::int64_t n) {
  if (n < 0) throw std::domain_error("rising_factorial: negative order");
  double log_abs = 0.0;
  int sign = 1;
  std::int64_t k = 0;
  // Non-positive factors first, one at a time; they fix the sign and may hit zero.
  for (; k < n && a + static_cast<double>(k) <= 0.0; ++k) {
    const double f = a + static_cast<double>(k);
    if (f == 0.0) return LogScalar::zero();
    log_abs += std::log(-f);
    sign = -sign;
  }
  const std::int64_t rest = n - k;
  const double start = a + static_cast<double>(k);
  if (rest <= detail::kDirectProductLimit) {
    for (std::int64_t j = 0; j < rest; ++j) log_abs += std::log(start + static_cast<double>(j));
  } else {
    log_abs += std::lgamma(start + static_cast<double>(rest)) - std::lgamma(start);
  }
  return LogScalar::from_log(log_abs, sign);
}

/// a (a-1) ... (a-p+1), with the empty product equal to one.
/// (a)^{(n)} / (b)^{(n)}. Dividing two rising factorials in log space loses
/// about |lgamma(a+n)| ulps to cancellation; here the tail ratio goes through
/// tgamma_delta_ratio instead, which is accurate to a few ulps for any n.
inline LogScalar rising_ratio(double a, double b, std::int64_t n) {
  if (n < 0) throw std::domain_error("rising_ratio: negative order");
  LogScalar head = LogScalar::one();
  for (; n > 0 && (a <= 0.0 || b <= 0.0); --n, a += 1.0, b += 1.0) {
    if (b == 0.0) throw std::domain_error("rising_ratio: zero factor in the denominator");
    if (a == 0.0) return LogScalar::zero();
    head = head * LogScalar::from_value(a / b);
  }
  if (n == 0 || a == b) return head;
  const double m = static_cast<double>(n);
  // Gamma(a+m)/Gamma(b+m) * Gamma(b)/Gamma(a).
  const double tail = b > a ? std::log(boost::math::tgamma_delta_ratio(a + m, b - a))
                            : -std::log(boost::math::tgamma_delta_ratio(b + m, a - b));
  const double front = b > a ? -std::log(boost::math::tgamma_delta_ratio(a, b - a))
                             : std::log(boost::math::tgamma_delta_ratio(b, a - b));
  return head * LogScalar::from_log(tail + front, 1);
}

inline LogScalar falling_factorial(double a, std::int64_t p) {
  if (p < 0) throw std::domain_error("falling_factorial: negative order");
  return rising_factorial(a - static_cast<double>(p) + 1.0, p);
}

inline double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline double log_binomial(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// ---------------------------------------------------------------------------
// Exact backend. T is any field type constructible from integers (Rational in
// production, double in a few tests).

template <class T>
T rising_power(const T& a, std::int64_t n) {
  T out(1);
  for (std::int64_t k = 0; k < n; ++k) out *= a + T(k);
  return out;
}

template <class T>
T falling_power(const T& a, std::int64_t p) {
  T out(1);
  for (std::int64_t k = 0; k < p; ++k) out *= a - T(k);
  return out;
}

template <class T>
T factorial_as(std::int64_t n) {
  T out(1);
  for (std::int64_t k = 2; k <= n; ++k) out *= T(k);
  return out;
}

template <class T>
T binomial_as(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return T(0);
  T out(1);
  for (std::int64_t j = 1; j <= k; ++j) {
    out *= T(n - k + j);
    out /= T(j);
  }
  return out;
}

/// Integer power with negative exponents allowed (x must be nonzero then).
template <class T>
T int_power(const T& x, std::int64_t q) {
  T out(1);
  const std::int64_t m = q < 0 ? -q : q;
  for (std::int64_t j = 0; j < m; ++j) out *= x;
  if (q < 0) return T(1) / out;
  return out;
}

/// Table S[p][i] of Stirling numbers of the second kind for p <= p_max, by
/// S(p,i) = i S(p-1,i) + S(p-1,i-1).
inline std::vector<std::vector<BigInt>> stirling2_table(int p_max) {
  std::vector<std::vector<BigInt>> s(p_max + 1);
  for (int p = 0; p <= p_max; ++p) {
    s[p].assign(p + 1, BigInt(0));
    if (p == 0) {
      s[0][0] = 1;
      continue;
    }
    for (int i = 1; i <= p; ++i) {
      BigInt v = s[p - 1].size() > static_cast<std::size_t>(i) ? BigInt(i) * s[p - 1][i] : BigInt(0);
      v += s[p - 1][i - 1];
      s[p][i] = v;
    }
  }
  return s;
}

inline Rational stirling2(int p, int i) {
  if (p < 0 || i < 0) throw std::domain_error("stirling2: negative argument");
  if (i > p) throw std::domain_error("stirling2: i > p");
  return Rational(stirling2_table(p)[p][i]);
}

/// (1/i!) sum_j (-1)^{i-j} C(i,j) j^p, the explicit form used for validation.
inline Rational stirling2_explicit(int p, int i) {
  if (i > p) throw std::domain_error("stirling2_explicit: i > p");
  BigInt acc = 0;
  for (int j = 0; j <= i; ++j) {
    BigInt term = binomial_as<BigInt>(i, j) * boost::multiprecision::pow(BigInt(j), static_cast<unsigned>(p));
    if ((i - j) % 2 == 1) term = -term;
    acc += term;
  }
  return Rational(acc) / Rational(factorial_as<BigInt>(i));
}

/// Triangle of generalized factorial coefficients C(m,k;alpha), m <= n_max,
/// built by C(m+1,k) = (m - k alpha) C(m,k) + alpha C(m,k-1), C(0,0) = 1.
template <class T>
class GfcTriangle {
 public:
  GfcTriangle(std::int64_t n_max, T alpha) : alpha_(std::move(alpha)), rows_(n_max + 1) {
    rows_[0].assign(1, T(1));
    for (std::int64_t m = 0; m < n_max; ++m) {
      auto& next = rows_[m + 1];
      next.assign(m + 2, T(0));
      const auto& cur = rows_[m];
      for (std::int64_t k = 0; k <= m + 1; ++k) {
        T v(0);
        if (k <= m) v += (T(m) - T(k) * alpha_) * cur[k];
        if (k >= 1) v += alpha_ * cur[k - 1];
        next[k] = v;
      }
    }
  }

  std::int64_t n_max() const { return static_cast<std::int64_t>(rows_.size()) - 1; }
  const T& alpha() const { return alpha_; }

  /// C(m,k;alpha); zero outside 0 <= k <= m.
  T at(std::int64_t m, std::int64_t k) const {
    if (m < 0 || m > n_max()) throw std::out_of_range("GfcTriangle: row out of range");
    if (k < 0 || k > m) return T(0);
    return rows_[m][k];
  }

 private:
  T alpha_;
  std::vector<std::vector<T>> rows_;
};

template <class T>
T gfc(std::int64_t n, std::int64_t k, const T& alpha) {
  if (k > n) throw std::domain_error("gfc: k > n");
  return GfcTriangle<T>(n, alpha).at(n, k);
}

/// (1/k!) sum_i C(k,i) (-1)^i (-alpha i)^{(n)}; exact only for exact T.
template <class T>
T gfc_alternating(std::int64_t n, std::int64_t k, const T& alpha) {
  if (k > n) throw std::domain_error("gfc_alternating: k > n");
  T acc(0);
  for (std::int64_t i = 0; i <= k; ++i) {
    T term = binomial_as<T>(k, i) * rising_power<T>(-alpha * T(i), n);
    if (i % 2 == 1) term = -term;
    acc += term;
  }
  return acc / factorial_as<T>(k);
}

/// Floating generalized factorial coefficients stored as logarithms. Entries
/// are non-negative for alpha in (0,1), so plain log-sum-exp is stable and no
/// row can overflow or underflow.
class GfcLogTriangle {
 public:
  GfcLogTriangle(std::int64_t n_max, double alpha) : alpha_(alpha), rows_(n_max + 1) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("GfcLogTriangle: alpha must lie in (0,1)");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const double log_alpha = std::log(alpha);
    rows_[0].assign(1, 0.0);
    for (std::int64_t m = 0; m < n_max; ++m) {
      auto& next = rows_[m + 1];
      next.assign(m + 2, kNegInf);
      const auto& cur = rows_[m];
      for (std::int64_t k = 0; k <= m + 1; ++k) {
        double x = kNegInf;
        double y = kNegInf;
        if (k <= m) {
          const double w = static_cast<double>(m) - static_cast<double>(k) * alpha;
          if (w > 0.0) x = std::log(w) + cur[k];
        }
        if (k >= 1) y = log_alpha + cur[k - 1];
        next[k] = log_add(x, y);
      }
    }
  }

  std::int64_t n_max() const { return static_cast<std::int64_t>(rows_.size()) - 1; }
  double alpha() const { return alpha_; }

  /// log C(m,k;alpha); -inf where the coefficient vanishes.
  double log_at(std::int64_t m, std::int64_t k) const {
    if (m < 0 || m > n_max()) throw std::out_of_range("GfcLogTriangle: row out of range");
    if (k < 0 || k > m) return -std::numeric_limits<double>::infinity();
    return rows_[m][k];
  }

  static double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) return y;
    if (y == -std::numeric_limits<double>::infinity()) return x;
    if (x < y) std::swap(x, y);
    return x + std::log1p(std::exp(y - x));
  }

 private:
  double alpha_;
  std::vector<std::vector<double>> rows_;
};

/// Checks sum_k (-1)^k C(n,k) (b)^{(k)}/(a)^{(k)} == (a-b)^{(n)}/(a)^{(n)} in
/// double precision. The tolerance is relative to the larger of |rhs| and the
/// sum of absolute terms, so cancellation on the left is not penalised twice.
inline bool chu_vandermonde_check(std::int64_t n, double a, double b, double rel_tol = 1e-12) {
  if (detail::is_nonpositive_integer(a)) throw std::domain_error("chu_vandermonde_check: a is a non-positive integer");
  double lhs = 0.0;
  double abs_sum = 0.0;
  double term = 1.0;  // (-1)^k C(n,k) (b)^{(k)} / (a)^{(k)}
  for (std::int64_t k = 0; k <= n; ++k) {
    lhs += term;
    abs_sum += std::fabs(term);
    const double kd = static_cast<double>(k);
    term *= -static_cast<double>(n - k) / (kd + 1.0) * (b + kd) / (a + kd);
  }
  const double rhs = (rising_factorial(a - b, n) / rising_factorial(a, n)).value();
  const double scale = std::max({std::fabs(rhs), abs_sum, std::numeric_limits<double>::min()});
  return std::fabs(lhs - rhs) <= rel_tol * scale;
}

/// Parses "p/q", an integer, or a finite decimal such as "0.125" or "-1e-3"
/// into an exact rational.
inline Rational parse_rational(const std::string& text) {
  auto fail = [&]() -> Rational { throw std::invalid_argument("cannot parse rational: '" + text + "'"); };
  if (text.empty()) return fail();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    try {
      auto strip = [](std::string t) {
        std::string sign;
        if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
          sign = t[0] == '-' ? "-" : "";
          t = t.substr(1);
        }
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) throw std::runtime_error("digits");
        const auto nz = t.find_first_not_of('0');
        return sign + (nz == std::string::npos ? std::string("0") : t.substr(nz));
      };
      BigInt num(strip(text.substr(0, slash)));
      BigInt den(strip(text.substr(slash + 1)));
      if (den == 0) return fail();
      return Rational(num, den);
    } catch (const std::runtime_error&) {
      return fail();
    }
  }
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  std::int64_t scale = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  std::int64_t exponent = 0;
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') return fail();
    try {
      std::size_t used = 0;
      exponent = std::stoll(text.substr(pos + 1), &used);
      if (pos + 1 + used != text.size()) return fail();
    } catch (const std::exception&) {
      return fail();
    }
  }
  // BigInt reads a leading 0 as an octal prefix.
  const auto nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  Rational value{BigInt(digits)};
  const std::int64_t shift = exponent - scale;
  const BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
  if (shift >= 0) {
    value *= Rational(ten_pow);
  } else {
    value /= Rational(ten_pow);
  }
  return negative ? Rational(-value) : value;
}

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

}  // namespace ewpitman
