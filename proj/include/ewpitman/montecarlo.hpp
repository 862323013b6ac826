#pragma once

// Replicated simulation. Every replicate i draws from its own generator seeded
// with derive_seed(master_seed, i) and writes into slot i; aggregation runs
// afterwards in replicate order. The summary is therefore a function of the
// plan alone, whatever the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "ewpitman/covariance.hpp"
#include "ewpitman/exact_moments.hpp"
#include "ewpitman/oracle.hpp"
#include "ewpitman/random.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/sibuya.hpp"
#include "ewpitman/statistics.hpp"

namespace ewpitman {

inline int default_parallelism() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body) {
  if (threads < 1) throw std::invalid_argument("parallel_for: threads must be >= 1");
  const auto workers = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct ExperimentPlan {
  ModelParams params;
  std::int64_t n = 0;
  std::int64_t replicates = 0;
  int d = 1;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  double gamma = 0.05;                   // CI level for the coverage count
  std::vector<std::int64_t> neg_grid;    // extra checkpoints for E[(K_n/n^alpha)^{-q}]
  double neg_q = 1.0;

  void validate() const {
    params.validate();
    params.require_asymptotic("run_experiment");
    if (n < 1) throw std::invalid_argument("ExperimentPlan: n must be >= 1");
    if (replicates < 2) throw std::invalid_argument("ExperimentPlan: replicates must be >= 2");
    if (d < 1) throw std::invalid_argument("ExperimentPlan: d must be >= 1");
    if (parallelism < 1) throw std::invalid_argument("ExperimentPlan: parallelism must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ExperimentPlan: gamma must lie in (0,1)");
    for (auto g : neg_grid)
      if (g < 1 || g > n) throw std::invalid_argument("ExperimentPlan: neg_grid points must lie in [1, n]");
  }
};

/// What one trajectory contributes.
struct ReplicateRecord {
  std::int64_t k_total = 0;
  double alpha_hat = 0.0;
  bool ci_hit = false;
  std::vector<double> q;      // sqrt(K_n) (P_{r,n} - p_alpha(r)), r = 1..d
  std::vector<double> q_alt;  // n^{-alpha/2} (K_{r,n} - p_alpha(r) K_n)
  std::vector<double> tail;   // tail[j] = sum_{r > j} Q_{r,n}^2, j = 0..d
  std::vector<double> neg;    // (K_m / m^alpha)^{-q} at each neg_grid point
};

struct NegMomentPoint {
  std::int64_t n = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct EmpiricalSummary {
  std::int64_t n = 0;
  std::int64_t replicates = 0;
  int d = 0;
  std::vector<double> mean_q;
  std::vector<double> se_mean_q;
  CovMatrix<double> cov_q;
  CovMatrix<double> cov_q_se;  // jackknife
  CovMatrix<double> cov_q_alt;
  double var_alpha_hat_scaled = 0.0;
  double gamma = 0.05;
  double ci_coverage = 0.0;
  std::vector<double> second_moments_q;
  std::vector<double> tail_mass;
  double mean_k_scaled = 0.0;  // E[K_n / n^alpha]
  double neg_q = 1.0;
  std::vector<NegMomentPoint> neg_moment_trace;
  double ks_statistic = 0.0;  // Q_1 against N(0, alpha (1 - alpha))
  double ks_p_value = 0.0;
  // Q_1 against N(mean_q[0], alpha (1 - alpha)): the shape alone. E[Q_{r,n}]
  // drifts like n^{-alpha/2} (E[K_{1,n} - alpha K_n] -> theta), which at
  // n = 1e5 is several standard errors and dominates the centred statistic.
  double ks_shifted_statistic = 0.0;
  double ks_shifted_p_value = 0.0;
};

struct Experiment {
  ExperimentPlan plan;
  std::vector<ReplicateRecord> records;
  EmpiricalSummary summary;
};

/// Kolmogorov limiting survival P(K > x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // the series is slow here and the value is 1 to double precision
  double acc = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    acc += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous cdf, with
/// Stephens' small-sample scaling of the statistic.
inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / m, static_cast<double>(i + 1) / m - f});
  }
  const double root = std::sqrt(m);
  return KsResult{d, kolmogorov_survival(d * (root + 0.12 + 0.11 / root))};
}

namespace detail {

inline ReplicateRecord simulate_replicate(const ExperimentPlan& plan, std::int64_t index,
                                          const std::vector<double>& pmf) {
  const auto& par = plan.params;
  std::vector<std::int64_t> points = plan.neg_grid;
  points.push_back(plan.n);
  const auto schedule = CheckpointSchedule::explicit_points(points);
  Rng gen(derive_seed(plan.master_seed, static_cast<std::uint64_t>(index)));

  ReplicateRecord rec;
  rec.neg.assign(plan.neg_grid.size(), 0.0);
  simulate(par, schedule, gen, [&](const PartitionState& s) {
    const double scaled = static_cast<double>(s.k_total()) / std::pow(static_cast<double>(s.n()), par.alpha);
    for (std::size_t g = 0; g < plan.neg_grid.size(); ++g)
      if (plan.neg_grid[g] == s.n()) rec.neg[g] = std::pow(scaled, -plan.neg_q);
    if (s.n() != plan.n) return;

    const CountsView v = s.view();
    const double k = static_cast<double>(s.k_total());
    const double root_k = std::sqrt(k);
    const double n_scale = std::pow(static_cast<double>(s.n()), par.alpha / 2.0);
    rec.k_total = s.k_total();
    rec.alpha_hat = alpha_hat(v);
    rec.ci_hit = alpha_ci(v, plan.gamma).contains(par.alpha);
    rec.q.resize(plan.d);
    rec.q_alt.resize(plan.d);
    for (int r = 1; r <= plan.d; ++r) {
      const double kr = static_cast<double>(v.count(r));
      rec.q[r - 1] = root_k * (kr / k - pmf[r]);
      rec.q_alt[r - 1] = (kr - pmf[r] * k) / n_scale;
    }
    // Q_r^2 for every r <= n; block sizes never exceed n so the rest is
    // K p_alpha(r)^2, which is below 1e-10 of the total here and dropped.
    std::vector<double> q2(plan.n + 1, 0.0);
    for (std::int64_t r = 1; r <= plan.n; ++r) {
      const double dev = static_cast<double>(v.count(r)) / k - pmf[r];
      q2[r] = k * dev * dev;
    }
    rec.tail.assign(plan.d + 1, 0.0);
    double acc = 0.0;
    for (std::int64_t r = plan.n; r >= 1; --r) {
      if (r <= plan.d) rec.tail[r] = acc;
      acc += q2[r];
    }
    rec.tail[0] = acc;
  });
  return rec;
}

// Mean and standard error of xs.
inline std::pair<double, double> mean_se(const std::vector<double>& xs) {
  const double m = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= m;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

// Sample covariance of (x, y) and its delete-one jackknife standard error.
// Uses the identity sum_{j != i} (x_j - xbar_(i))(y_j - ybar_(i)) =
// S_xy - z_i R / (R - 1), z_i = (x_i - xbar)(y_i - ybar).
inline std::pair<double, double> covariance_jackknife(const std::vector<double>& x, const std::vector<double>& y) {
  const auto R = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= R;
  my /= R;
  std::vector<double> z(x.size());
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = (x[i] - mx) * (y[i] - my);
    sxy += z[i];
  }
  const double cov = sxy / (R - 1.0);
  if (x.size() < 3) return {cov, std::numeric_limits<double>::quiet_NaN()};
  double mean_loo = 0.0;
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    loo[i] = (sxy - z[i] * R / (R - 1.0)) / (R - 2.0);
    mean_loo += loo[i];
  }
  mean_loo /= R;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  return {cov, std::sqrt((R - 1.0) / R * ss)};
}

}  // namespace detail

inline EmpiricalSummary summarize(const ExperimentPlan& plan, const std::vector<ReplicateRecord>& records) {
  const int d = plan.d;
  const auto R = static_cast<std::int64_t>(records.size());
  EmpiricalSummary s;
  s.n = plan.n;
  s.replicates = R;
  s.d = d;
  s.gamma = plan.gamma;
  s.neg_q = plan.neg_q;

  std::vector<std::vector<double>> q(d, std::vector<double>(R));
  std::vector<std::vector<double>> qa(d, std::vector<double>(R));
  for (std::int64_t i = 0; i < R; ++i)
    for (int r = 0; r < d; ++r) {
      q[r][i] = records[i].q[r];
      qa[r][i] = records[i].q_alt[r];
    }

  s.mean_q.resize(d);
  s.se_mean_q.resize(d);
  s.second_moments_q.assign(d, 0.0);
  for (int r = 0; r < d; ++r) {
    std::tie(s.mean_q[r], s.se_mean_q[r]) = detail::mean_se(q[r]);
    for (double x : q[r]) s.second_moments_q[r] += x * x;
    s.second_moments_q[r] /= static_cast<double>(R);
  }

  s.cov_q = CovMatrix<double>(d);
  s.cov_q_se = CovMatrix<double>(d);
  s.cov_q_alt = CovMatrix<double>(d);
  for (int i = 1; i <= d; ++i)
    for (int j = i; j <= d; ++j) {
      const auto [c, se] = detail::covariance_jackknife(q[i - 1], q[j - 1]);
      const auto [ca, unused] = detail::covariance_jackknife(qa[i - 1], qa[j - 1]);
      (void)unused;
      s.cov_q(i, j) = s.cov_q(j, i) = c;
      s.cov_q_se(i, j) = s.cov_q_se(j, i) = se;
      s.cov_q_alt(i, j) = s.cov_q_alt(j, i) = ca;
    }
  s.var_alpha_hat_scaled = s.cov_q(1, 1);

  std::int64_t hits = 0;
  double k_scaled = 0.0;
  for (const auto& rec : records) {
    hits += rec.ci_hit ? 1 : 0;
    k_scaled += static_cast<double>(rec.k_total);
  }
  s.ci_coverage = static_cast<double>(hits) / static_cast<double>(R);
  s.mean_k_scaled = k_scaled / static_cast<double>(R) / std::pow(static_cast<double>(plan.n), plan.params.alpha);

  s.tail_mass.assign(d + 1, 0.0);
  for (const auto& rec : records)
    for (int j = 0; j <= d; ++j) s.tail_mass[j] += rec.tail[j];
  for (auto& v : s.tail_mass) v /= static_cast<double>(R);

  for (std::size_t g = 0; g < plan.neg_grid.size(); ++g) {
    std::vector<double> xs(R);
    for (std::int64_t i = 0; i < R; ++i) xs[i] = records[i].neg[g];
    const auto [m, se] = detail::mean_se(xs);
    s.neg_moment_trace.push_back(NegMomentPoint{plan.neg_grid[g], m, se});
  }

  const double sd = std::sqrt(plan.params.alpha * (1.0 - plan.params.alpha));
  const auto ks = ks_test(q[0], [sd](double x) { return normal_cdf(x / sd); });
  s.ks_statistic = ks.statistic;
  s.ks_p_value = ks.p_value;
  const double shift = s.mean_q[0];
  const auto ks_shifted = ks_test(q[0], [sd, shift](double x) { return normal_cdf((x - shift) / sd); });
  s.ks_shifted_statistic = ks_shifted.statistic;
  s.ks_shifted_p_value = ks_shifted.p_value;
  return s;
}

inline Experiment run_experiment_full(ExperimentPlan plan) {
  plan.validate();
  std::sort(plan.neg_grid.begin(), plan.neg_grid.end());
  plan.neg_grid.erase(std::unique(plan.neg_grid.begin(), plan.neg_grid.end()), plan.neg_grid.end());
  const auto pmf = SibuyaDist(plan.params.alpha).pmf_table(plan.n);
  Experiment ex;
  ex.plan = plan;
  ex.records.resize(plan.replicates);
  parallel_for(plan.replicates, plan.parallelism,
               [&](std::int64_t i) { ex.records[i] = detail::simulate_replicate(plan, i, pmf); });
  ex.summary = summarize(plan, ex.records);
  return ex;
}

inline EmpiricalSummary run_experiment(const ExperimentPlan& plan) { return run_experiment_full(plan).summary; }

/// Heuristic drift allowance for finite n: n^{-alpha/2} sqrt(Gamma_ii Gamma_jj).
/// Not a bound from theory; it keeps the comparison honest about a bias the
/// limit theorem says nothing quantitative about.
inline double bias_allowance(std::int64_t n, double alpha, double gii, double gjj) {
  return std::pow(static_cast<double>(n), -alpha / 2.0) * std::sqrt(std::fabs(gii * gjj));
}

/// Largest n at which mean_reference evaluates E[Q_{r,n}] exactly.
inline constexpr std::int64_t kMeanReferenceExactN = 2000;

/// E[Q_{r,n}]: exact up to kMeanReferenceExactN, beyond that the exact value
/// there carried along the leading n^{-alpha/2} decay. n^{alpha/2} E[Q_{1,n}]
/// moves by under 1% between n = 500 and 4000 at alpha = 0.5, theta = 1.
inline double mean_reference(std::int64_t n, int r, const ModelParams& params) {
  const std::int64_t m = std::min(n, kMeanReferenceExactN);
  const double at_m = mean_q(m, r, params);
  return at_m * std::pow(static_cast<double>(m) / static_cast<double>(n), params.alpha / 2.0);
}

/// mean_q[r] against the finite-n mean: 3 standard errors, plus 2% of the
/// reference when it is extrapolated.
inline bool mean_within(const EmpiricalSummary& s, int r, const ModelParams& params) {
  const double ref = mean_reference(s.n, r, params);
  const double slack = s.n > kMeanReferenceExactN ? 0.02 * std::fabs(ref) : 0.0;
  return std::fabs(s.mean_q[r - 1] - ref) <= 3.0 * s.se_mean_q[r - 1] + slack;
}

struct CovEntryReport {
  int i = 0;
  int j = 0;
  double empirical = 0.0;
  double expected = 0.0;
  double abs_error = 0.0;
  double se = 0.0;
  double allowance = 0.0;
  bool within = false;
  bool sign_ok = true;  // off-diagonal entries must be negative
};

struct CovReport {
  int d = 0;
  std::vector<CovEntryReport> entries;  // upper triangle, row-major
  bool all_within = true;
  bool signs_ok = true;
  bool passed() const { return all_within && signs_ok; }
};

/// Entrywise |cov_q - Gamma_d| against 3 jackknife standard errors plus the
/// heuristic bias allowance.
inline CovReport compare_cov(const EmpiricalSummary& summary, const CovMatrix<double>& gamma, double alpha) {
  if (gamma.d() > summary.d) throw std::invalid_argument("compare_cov: Gamma larger than the summary");
  CovReport rep;
  rep.d = gamma.d();
  for (int i = 1; i <= gamma.d(); ++i)
    for (int j = i; j <= gamma.d(); ++j) {
      CovEntryReport e;
      e.i = i;
      e.j = j;
      e.empirical = summary.cov_q(i, j);
      e.expected = gamma(i, j);
      e.abs_error = std::fabs(e.empirical - e.expected);
      e.se = summary.cov_q_se(i, j);
      e.allowance = bias_allowance(summary.n, alpha, gamma(i, i), gamma(j, j));
      e.within = e.abs_error <= 3.0 * e.se + e.allowance;
      if (i != j) e.sign_ok = e.empirical < 0.0;
      rep.all_within = rep.all_within && e.within;
      rep.signs_ok = rep.signs_ok && e.sign_ok;
      rep.entries.push_back(e);
    }
  return rep;
}

inline CovReport compare_cov(const EmpiricalSummary& summary, const ModelParams& params, int d) {
  return compare_cov(summary, gamma_closed_form<double>(d, params.alpha), params.alpha);
}

/// Fraction of replicates whose interval at level gamma covers alpha.
inline double ci_coverage(ExperimentPlan plan, double gamma) {
  plan.gamma = gamma;
  return run_experiment(plan).ci_coverage;
}

struct NegMomentTrace {
  double q = 1.0;
  std::vector<NegMomentPoint> points;
  double max_min_ratio = 0.0;
  double threshold = 2.0;
  bool bounded() const { return max_min_ratio < threshold; }
};

/// E[(K_n / n^alpha)^{-q}] along n_grid, one trajectory per replicate.
inline NegMomentTrace neg_moment_scan(const ModelParams& params, double q, std::vector<std::int64_t> n_grid,
                                      std::int64_t replicates, std::uint64_t master_seed, int parallelism = 1,
                                      double threshold = 2.0) {
  params.validate();
  if (!(params.theta > 0.0)) throw std::invalid_argument("neg_moment_scan: theta must be > 0");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("neg_moment_scan: alpha must be > 0");
  if (!(q > 0.0 && q < 1.0 + params.theta / params.alpha))
    throw std::invalid_argument("neg_moment_scan: q must lie in (0, 1 + theta/alpha)");
  if (n_grid.empty()) throw std::invalid_argument("neg_moment_scan: empty grid");
  if (replicates < 2) throw std::invalid_argument("neg_moment_scan: replicates must be >= 2");
  const auto schedule = CheckpointSchedule::explicit_points(n_grid);
  const auto pts = schedule.points();
  std::vector<std::vector<double>> vals(pts.size(), std::vector<double>(replicates));
  parallel_for(replicates, parallelism, [&](std::int64_t i) {
    Rng gen(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    std::size_t g = 0;
    simulate(
        params, schedule, gen,
        [&](const PartitionState& s) {
          const double scaled = static_cast<double>(s.k_total()) / std::pow(static_cast<double>(s.n()), params.alpha);
          vals[g++][i] = std::pow(scaled, -q);
        },
        StorageMode::kElements);
  });
  NegMomentTrace out;
  out.q = q;
  out.threshold = threshold;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t g = 0; g < pts.size(); ++g) {
    const auto [m, se] = detail::mean_se(vals[g]);
    out.points.push_back(NegMomentPoint{pts[g], m, se});
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  out.max_min_ratio = hi / lo;
  return out;
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  int bins = 0;
};

/// Pearson chi-square of observed counts against expected probabilities.
/// Cells with expected count below min_expected are pooled into one.
inline ChiSquareResult chi_square(const std::vector<std::int64_t>& observed, const std::vector<double>& probs,
                                  double min_expected = 5.0) {
  if (observed.size() != probs.size() || observed.empty()) throw std::invalid_argument("chi_square: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  std::vector<double> obs;
  std::vector<double> exp;
  double pool_o = 0.0;
  double pool_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    if (e < min_expected) {
      pool_o += static_cast<double>(observed[i]);
      pool_e += e;
    } else {
      obs.push_back(static_cast<double>(observed[i]));
      exp.push_back(e);
    }
  }
  if (pool_e > 0.0) {
    obs.push_back(pool_o);
    exp.push_back(pool_e);
  }
  ChiSquareResult res;
  res.bins = static_cast<int>(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) res.statistic += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  res.dof = res.bins - 1;
  if (res.dof < 1) {
    res.p_value = 1.0;
    return res;
  }
  const boost::math::chi_squared dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

struct SamplerLawReport {
  std::int64_t n = 0;
  std::int64_t replicates = 0;
  std::vector<CountVector> cells;
  std::vector<double> probabilities;
  std::vector<std::int64_t> observed;
  ChiSquareResult chi;
};

/// Simulates `replicates` partitions of [n] and tabulates their count vectors
/// against the exact law. Deterministic in (par, n, replicates, seed).
inline SamplerLawReport sampler_law_test(std::int64_t n, const exact::RationalParams& par, std::int64_t replicates,
                                         std::uint64_t master_seed, int parallelism = 1) {
  const ExactLaw law = enumerate_law(n, par);
  const auto params = ModelParams::make(to_double(par.alpha), to_double(par.theta));
  SamplerLawReport rep;
  rep.n = n;
  rep.replicates = replicates;
  std::map<CountVector, std::size_t> index;
  for (const auto& [c, p] : law.support) {
    index.emplace(c, rep.cells.size());
    rep.cells.push_back(c);
    rep.probabilities.push_back(to_double(p));
  }
  std::vector<std::size_t> cell(replicates);
  const auto schedule = CheckpointSchedule::explicit_points({n});
  parallel_for(replicates, parallelism, [&](std::int64_t i) {
    Rng gen(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    simulate(params, schedule, gen, [&](const PartitionState& s) {
      CountVector c(n + 1, 0);
      for (std::int64_t r = 1; r <= n; ++r) c[r] = s.count(r);
      cell[i] = index.at(c);
    });
  });
  rep.observed.assign(rep.cells.size(), 0);
  for (auto c : cell) ++rep.observed[c];
  rep.chi = chi_square(rep.observed, rep.probabilities);
  return rep;
}

}  // namespace ewpitman
