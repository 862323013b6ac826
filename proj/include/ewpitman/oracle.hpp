#pragma once

// Ground truth for small n: the exact law of the count vector
// (K_{1,n}, ..., K_{n,n}) in rational arithmetic,
//
//   P(k) = n! (theta/alpha)^{(s)} / (theta)^{(n)} prod_i p_alpha(i)^{k_i} / k_i!,   s = sum k_i,
//
// enumerated over integer partitions of n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewpitman/exact_moments.hpp"
#include "ewpitman/martingale.hpp"
#include "ewpitman/numerics.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/sibuya.hpp"

namespace ewpitman {

inline constexpr int kOracleMaxN = 10;

/// Count vector indexed by block size: counts[r] = K_{r,n}, counts[0] unused.
using CountVector = std::vector<std::int64_t>;

struct ExactLaw {
  std::int64_t n = 0;
  std::map<CountVector, Rational> support;

  Rational total_mass() const {
    Rational acc(0);
    for (const auto& [k, p] : support) acc += p;
    return acc;
  }
};

inline std::int64_t blocks_of(const CountVector& c) {
  std::int64_t s = 0;
  for (std::size_t r = 1; r < c.size(); ++r) s += c[r];
  return s;
}

inline CountsView view_of(const CountVector& c, std::int64_t n) { return CountsView{n, blocks_of(c), c}; }

/// Calls f(counts) for every partition of the integer n, sizes 1..n.
inline void for_each_integer_partition(std::int64_t n, const std::function<void(const CountVector&)>& f) {
  CountVector c(n + 1, 0);
  // Fill sizes from the largest down; remaining mass goes to the next size.
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t size, std::int64_t rest) {
    if (rest == 0) {
      f(c);
      return;
    }
    if (size == 1) {
      c[1] = rest;
      f(c);
      c[1] = 0;
      return;
    }
    for (std::int64_t m = rest / size; m >= 0; --m) {
      c[size] = m;
      rec(size - 1, rest - m * size);
    }
    c[size] = 0;
  };
  rec(n, n);
}

inline ExactLaw enumerate_law(std::int64_t n, const exact::RationalParams& par) {
  if (n < 1) throw std::domain_error("enumerate_law: n must be >= 1");
  if (n > kOracleMaxN) throw std::length_error("enumerate_law: n exceeds the oracle limit of 10");
  par.validate();
  std::vector<Rational> p(n + 1, Rational(0));
  for (std::int64_t r = 1; r <= n; ++r) p[r] = sibuya_pmf<Rational>(par.alpha, r);
  const Rational n_fact = factorial_as<Rational>(n);

  ExactLaw law;
  law.n = n;
  for_each_integer_partition(n, [&](const CountVector& c) {
    Rational mass = n_fact * exact::weight<Rational>(n, blocks_of(c), par);
    for (std::int64_t r = 1; r <= n; ++r) {
      if (c[r] == 0) continue;
      mass *= int_power<Rational>(p[r], c[r]) / factorial_as<Rational>(c[r]);
    }
    law.support.emplace(c, mass);
  });
  return law;
}

using Statistic = std::function<Rational(const CountVector&, std::int64_t n)>;

inline Rational law_moment(const ExactLaw& law, const Statistic& f) {
  Rational acc(0);
  for (const auto& [c, mass] : law.support) acc += f(c, law.n) * mass;
  return acc;
}

/// Statistic selectors. A size r beyond n reads as zero.
namespace stat {

inline Statistic one() {
  return [](const CountVector&, std::int64_t) { return Rational(1); };
}

inline Statistic K() {
  return [](const CountVector& c, std::int64_t) { return Rational(blocks_of(c)); };
}

inline Statistic K_r(std::int64_t r) {
  return [r](const CountVector& c, std::int64_t) {
    return r < static_cast<std::int64_t>(c.size()) ? Rational(c[r]) : Rational(0);
  };
}

inline Statistic P_r(std::int64_t r) {
  return [r](const CountVector& c, std::int64_t) {
    const Rational kr = r < static_cast<std::int64_t>(c.size()) ? Rational(c[r]) : Rational(0);
    return kr / Rational(blocks_of(c));
  };
}

/// K_{r,n}^p K_n^q.
inline Statistic power(std::int64_t r, int p, int q) {
  return [r, p, q](const CountVector& c, std::int64_t) {
    const Rational kr = r < static_cast<std::int64_t>(c.size()) ? Rational(c[r]) : Rational(0);
    return int_power<Rational>(kr, p) * int_power<Rational>(Rational(blocks_of(c)), q);
  };
}

/// (K_{r,n})_{(p)}.
inline Statistic falling(std::int64_t r, int p) {
  return [r, p](const CountVector& c, std::int64_t) {
    const Rational kr = r < static_cast<std::int64_t>(c.size()) ? Rational(c[r]) : Rational(0);
    return falling_power<Rational>(kr, p);
  };
}

inline Statistic M(int r, const exact::RationalParams& par) {
  auto coeffs = std::make_shared<MartingaleCoeffs<Rational>>(r, par.alpha, par.theta);
  return [coeffs](const CountVector& c, std::int64_t n) { return coeffs->M(view_of(c, n)); };
}

/// E[M_{r,n+1} | current counts].
inline Statistic M_next(int r, const exact::RationalParams& par) {
  auto coeffs = std::make_shared<MartingaleCoeffs<Rational>>(r, par.alpha, par.theta);
  return [coeffs](const CountVector& c, std::int64_t n) { return coeffs->one_step_expectation(view_of(c, n)); };
}

}  // namespace stat

/// Law restricted to K_n = k and renormalized.
inline ExactLaw conditional_law(const ExactLaw& law, std::int64_t k) {
  Rational mass(0);
  for (const auto& [c, p] : law.support)
    if (blocks_of(c) == k) mass += p;
  if (mass == 0) throw std::domain_error("conditional_law: P(K_n = k) is zero");
  ExactLaw out;
  out.n = law.n;
  for (const auto& [c, p] : law.support)
    if (blocks_of(c) == k) out.support.emplace(c, p / mass);
  return out;
}

/// The conditional law given K_n = k in closed form,
/// n! prod_i (p_alpha(i)^{k_i} / k_i!) / C(n,k;alpha). Free of theta.
inline Rational conditional_closed_form(const CountVector& c, std::int64_t n, const Rational& alpha) {
  Rational mass = factorial_as<Rational>(n);
  for (std::int64_t r = 1; r < static_cast<std::int64_t>(c.size()); ++r) {
    if (c[r] == 0) continue;
    mass *= int_power<Rational>(sibuya_pmf<Rational>(alpha, r), c[r]) / factorial_as<Rational>(c[r]);
  }
  return mass / gfc<Rational>(n, blocks_of(c), alpha);
}

inline Rational marginal_K(const ExactLaw& law, std::int64_t k) {
  Rational mass(0);
  for (const auto& [c, p] : law.support)
    if (blocks_of(c) == k) mass += p;
  return mass;
}

inline std::int64_t partition_count(std::int64_t n) {
  std::int64_t count = 0;
  for_each_integer_partition(n, [&](const CountVector&) { ++count; });
  return count;
}

/// One named comparison of a formula against the oracle.
struct OracleCheck {
  std::string name;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;  // float backend, relative to max(1, |truth|)
  bool exact_match = true;  // rational backend agreed exactly
  bool passed = true;
};

inline double abs_diff(const Rational& a, const Rational& b) { return std::fabs(to_double(a - b)); }

/// Full validation suite over n <= n_max for one parameter pair: marginal
/// pmf, means, factorial, joint and conditional moments (float and rational
/// backends), conditional law, and the exact martingale property. The
/// rational backend must agree exactly; the float backend within tol relative
/// to max(1, |value|), since moments such as E[K_r^3 K^2] reach 1e4 at n = 8.
inline std::vector<OracleCheck> oracle_suite(std::int64_t n_max, const exact::RationalParams& par, double tol = 1e-12) {
  const double a = to_double(par.alpha);
  const double t = to_double(par.theta);
  const ModelParams fp = ModelParams::make(a, t);
  const MomentEngine engine(n_max, a);
  const exact::Engine<Rational> ex(n_max, par);

  std::map<std::string, OracleCheck> checks;
  auto record = [&](const std::string& name, const Rational& truth, double approx, const Rational& exact_value) {
    auto& c = checks[name];
    c.name = name;
    const double truth_d = to_double(truth);
    const double err = std::fabs(approx - truth_d);
    c.max_abs_error = std::max(c.max_abs_error, err);
    c.max_rel_error = std::max(c.max_rel_error, err / std::max(1.0, std::fabs(truth_d)));
    if (exact_value != truth) c.exact_match = false;
  };

  for (std::int64_t n = 1; n <= n_max; ++n) {
    const ExactLaw law = enumerate_law(n, par);
    if (law.total_mass() != 1) checks["normalization"].exact_match = false;
    checks["normalization"].name = "normalization";
    if (static_cast<std::int64_t>(law.support.size()) != partition_count(n)) checks["normalization"].exact_match = false;

    for (std::int64_t k = 1; k <= n; ++k) {
      const Rational truth = marginal_K(law, k);
      record("pmf_K", truth, engine.pmf_K(n, k, t), ex.pmf_K(n, k));
    }
    record("mean_K", law_moment(law, stat::K()), mean_K(n, fp), ex.mean_K(n));

    for (int r = 1; r <= n; ++r) {
      record("mean_Kr", law_moment(law, stat::K_r(r)), mean_Kr(n, r, fp), ex.mean_Kr(n, r));
      for (int p = 1; p * r <= n && p <= 3; ++p) {
        record("factorial_moment_Kr", law_moment(law, stat::falling(r, p)), factorial_moment_Kr(n, r, p, fp),
               ex.factorial_moment_Kr(n, r, p));
      }
      for (int p = 0; p <= 3 && p * r <= n; ++p) {
        for (int q = -1; q <= 2; ++q) {
          record("joint_moment", law_moment(law, stat::power(r, p, q)), engine.joint_moment(n, r, p, q, t),
                 ex.joint_moment(n, r, p, q));
        }
      }
    }

    for (std::int64_t k = 1; k <= n; ++k) {
      const ExactLaw cond = conditional_law(law, k);
      auto& closed = checks["conditional_law"];
      closed.name = "conditional_law";
      for (const auto& [c, mass] : cond.support) {
        const Rational cf = conditional_closed_form(c, n, par.alpha);
        closed.max_abs_error = std::max(closed.max_abs_error, abs_diff(cf, mass));
        closed.max_rel_error = closed.max_abs_error;
        if (cf != mass) closed.exact_match = false;
      }
      for (int r = 1; r <= n; ++r) {
        for (int p = 0; p <= 3; ++p) {
          record("conditional_moment_Kr", law_moment(cond, stat::power(r, p, 0)),
                 engine.conditional_moment_Kr(n, k, r, p), ex.conditional_moment_Kr(n, k, r, p));
        }
      }
    }

    // Exact martingale property, for every state with n >= r.
    if (n <= 7) {
      for (int r = 1; r <= n; ++r) {
        const MartingaleCoeffs<Rational> coeffs(r, par.alpha, par.theta);
        auto& c = checks["martingale"];
        c.name = "martingale";
        for (const auto& [counts, mass] : law.support) {
          const CountsView v = view_of(counts, n);
          const Rational lhs = coeffs.one_step_expectation(v);
          const Rational rhs = coeffs.M(v);
          c.max_abs_error = std::max(c.max_abs_error, abs_diff(lhs, rhs));
          c.max_rel_error = c.max_abs_error;
          if (lhs != rhs) c.exact_match = false;
        }
      }
    }
  }

  std::vector<OracleCheck> out;
  for (auto& [name, c] : checks) {
    c.passed = c.exact_match && c.max_rel_error <= tol;
    out.push_back(c);
  }
  return out;
}

}  // namespace ewpitman
