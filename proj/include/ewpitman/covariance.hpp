#pragma once

// Limiting covariance of the centred self-normalized process.
//
//   Lambda_{i,j} = (-1)^{i+j} (i+j)!/(i! j!) p_alpha(i+j)
//   J_{i,j}      = (j - alpha)^{(i-j)} / (i-j)!   for j <= i, else 0
//   Gamma_d      = J_d Lambda_d J_d^T  ==  diag(p_alpha) - p_alpha p_alpha^T
//
// The entries of Lambda and J grow combinatorially with d (|Lambda_{30,30}| is
// about 1e14 at alpha = 1/2) while Gamma stays below one, so the triple
// product cancels about 24 digits at d = 30. The builders are templated on the
// scalar; lemma_cov_check runs them in 50-digit binary floating point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ewpitman/numerics.hpp"
#include "ewpitman/sibuya.hpp"

namespace ewpitman {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

/// Dense square matrix addressed with 1-based (i, j), matching the usual
/// indexing of block sizes.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int d) : d_(d), data_(static_cast<std::size_t>(d) * d, T(0)) {
    if (d < 1) throw std::invalid_argument("matrix order must be >= 1");
  }

  int d() const { return d_; }
  T& operator()(int i, int j) { return data_[index(i, j)]; }
  const T& operator()(int i, int j) const { return data_[index(i, j)]; }

  template <class U>
  SquareMatrix<U> cast() const {
    SquareMatrix<U> out(d_);
    for (int i = 1; i <= d_; ++i)
      for (int j = 1; j <= d_; ++j) out(i, j) = static_cast<U>((*this)(i, j));
    return out;
  }

  /// Rows as nested vectors (row-major), for serialization.
  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(d_, std::vector<double>(d_));
    for (int i = 1; i <= d_; ++i)
      for (int j = 1; j <= d_; ++j) out[i - 1][j - 1] = static_cast<double>((*this)(i, j));
    return out;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(j - 1);
  }

  int d_ = 0;
  std::vector<T> data_;
};

/// Symmetric covariance matrix.
template <class T = double>
using CovMatrix = SquareMatrix<T>;

/// Unit lower-triangular matrix.
template <class T = double>
using LowerTriangular = SquareMatrix<T>;

namespace detail {

template <class T>
void require_alpha(const T& alpha) {
  if (!(alpha > T(0) && alpha < T(1))) throw std::invalid_argument("alpha must lie in (0,1)");
}

// p_alpha(1..m) by the pmf recurrence.
template <class T>
std::vector<T> sibuya_prefix(int m, const T& alpha) {
  std::vector<T> p(m + 1, T(0));
  if (m >= 1) p[1] = alpha;
  for (int r = 1; r < m; ++r) p[r + 1] = p[r] * (T(r) - alpha) / T(r + 1);
  return p;
}

}  // namespace detail

template <class T = double>
CovMatrix<T> lambda_matrix(int d, const T& alpha) {
  detail::require_alpha(alpha);
  const auto p = detail::sibuya_prefix<T>(2 * d, alpha);
  CovMatrix<T> out(d);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      T v = binomial_as<T>(i + j, i) * p[i + j];
      out(i, j) = ((i + j) % 2 == 0) ? v : T(-v);
    }
  }
  return out;
}

template <class T = double>
LowerTriangular<T> j_matrix(int d, const T& alpha) {
  detail::require_alpha(alpha);
  LowerTriangular<T> out(d);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= i; ++j) out(i, j) = rising_power<T>(T(j) - alpha, i - j) / factorial_as<T>(i - j);
  }
  return out;
}

/// J_d Lambda_d J_d^T.
template <class T = double>
CovMatrix<T> gamma_via_product(int d, const T& alpha) {
  const auto lam = lambda_matrix<T>(d, alpha);
  const auto jm = j_matrix<T>(d, alpha);
  CovMatrix<T> tmp(d);  // J Lambda
  for (int i = 1; i <= d; ++i)
    for (int l = 1; l <= d; ++l) {
      T acc(0);
      for (int k = 1; k <= i; ++k) acc += jm(i, k) * lam(k, l);
      tmp(i, l) = acc;
    }
  CovMatrix<T> out(d);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      T acc(0);
      for (int l = 1; l <= j; ++l) acc += tmp(i, l) * jm(j, l);
      out(i, j) = acc;
    }
  return out;
}

/// diag(p_alpha) - p_alpha p_alpha^T, d x d section.
template <class T = double>
CovMatrix<T> gamma_closed_form(int d, const T& alpha) {
  detail::require_alpha(alpha);
  const auto p = detail::sibuya_prefix<T>(d, alpha);
  CovMatrix<T> out(d);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) out(i, j) = (i == j ? p[i] : T(0)) - p[i] * p[j];
  return out;
}

/// Sigma_d: Lambda_d with entry (i,j) scaled by
/// Gamma(alpha+theta-i+1) Gamma(alpha+theta-j+1) / Gamma(theta+1)^2.
inline CovMatrix<double> sigma_matrix(int d, double alpha, double theta) {
  auto out = lambda_matrix<double>(d, alpha);
  const double g0 = std::tgamma(theta + 1.0);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j)
      out(i, j) *= std::tgamma(alpha + theta - i + 1.0) * std::tgamma(alpha + theta - j + 1.0) / (g0 * g0);
  return out;
}

template <class T>
T max_abs_difference(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  if (a.d() != b.d()) throw std::invalid_argument("max_abs_difference: order mismatch");
  T worst(0);
  for (int i = 1; i <= a.d(); ++i)
    for (int j = 1; j <= a.d(); ++j) {
      T diff = a(i, j) - b(i, j);
      if (diff < T(0)) diff = -diff;
      if (diff > worst) worst = diff;
    }
  return worst;
}

/// max |J Lambda J^T - (diag(p) - p p^T)| over the d x d section, evaluated in
/// 50-digit arithmetic.
inline double lemma_cov_check(int d, double alpha) {
  const HighPrecision a(alpha);
  return static_cast<double>(max_abs_difference(gamma_via_product<HighPrecision>(d, a),
                                                gamma_closed_form<HighPrecision>(d, a)));
}

inline Eigen::MatrixXd to_eigen(const CovMatrix<double>& m) {
  Eigen::MatrixXd out(m.d(), m.d());
  for (int i = 1; i <= m.d(); ++i)
    for (int j = 1; j <= m.d(); ++j) out(i - 1, j - 1) = m(i, j);
  return out;
}

/// Pivoted LDL^T succeeds with no pivot below -tol.
inline bool is_positive_semidefinite(const CovMatrix<double>& m, double tol = 1e-12) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(to_eigen(m));
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() >= -tol).all();
}

inline double trace(const CovMatrix<double>& m) {
  double t = 0.0;
  for (int i = 1; i <= m.d(); ++i) t += m(i, i);
  return t;
}

}  // namespace ewpitman
