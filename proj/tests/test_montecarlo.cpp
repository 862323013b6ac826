#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "ewpitman/exact_moments.hpp"
#include "ewpitman/io.hpp"
#include "ewpitman/montecarlo.hpp"

using namespace ewpitman;

namespace {

ExperimentPlan small_plan(int parallelism) {
  ExperimentPlan p;
  p.params = ModelParams::make(0.5, 1.0);
  p.n = 2000;
  p.replicates = 400;
  p.d = 3;
  p.master_seed = 77;
  p.parallelism = parallelism;
  p.neg_grid = {100, 1000};
  return p;
}

}  // namespace

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 8, [&](std::int64_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(3, 0, [](std::int64_t) {}), std::invalid_argument);
}

TEST(ParallelFor, PropagatesWorkerException) {
  for (int threads : {1, 4}) {
    EXPECT_THROW(parallel_for(100, threads,
                              [](std::int64_t i) {
                                if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
  }
}

TEST(Experiment, PlanValidation) {
  auto p = small_plan(1);
  p.replicates = 1;
  EXPECT_THROW(run_experiment(p), std::invalid_argument);
  p = small_plan(1);
  p.d = 0;
  EXPECT_THROW(run_experiment(p), std::invalid_argument);
  p = small_plan(1);
  p.neg_grid = {5000};
  EXPECT_THROW(run_experiment(p), std::invalid_argument);
  p = small_plan(1);
  p.params = ModelParams::make(0.0, 1.0);
  EXPECT_THROW(run_experiment(p), std::invalid_argument);
}

TEST(Experiment, IndependentOfParallelism) {
  const auto a = dump(summary_json(run_experiment(small_plan(1)), 0.5));
  const auto b = dump(summary_json(run_experiment(small_plan(8)), 0.5));
  EXPECT_EQ(a, b);
}

TEST(Experiment, ReplicatesUseDistinctSeeds) {
  auto p = small_plan(1);
  p.replicates = 2;
  const auto ex = run_experiment_full(p);
  EXPECT_NE(ex.records[0].q, ex.records[1].q);
  auto p2 = small_plan(1);
  p2.master_seed = 78;
  EXPECT_NE(dump(summary_json(run_experiment(small_plan(1)), 0.5)), dump(summary_json(run_experiment(p2), 0.5)));
}

TEST(Experiment, SummaryShapesAndSanity) {
  const auto ex = run_experiment_full(small_plan(2));
  const auto& s = ex.summary;
  EXPECT_EQ(s.d, 3);
  EXPECT_EQ(s.mean_q.size(), 3u);
  EXPECT_EQ(s.second_moments_q.size(), 3u);
  EXPECT_EQ(s.neg_moment_trace.size(), 2u);
  EXPECT_GE(s.ci_coverage, 0.0);
  EXPECT_LE(s.ci_coverage, 1.0);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) EXPECT_EQ(s.cov_q(i, j), s.cov_q(j, i));
  // Second moment equals variance plus squared mean, up to the R/(R-1) factor.
  const double R = 400.0;
  for (int r = 1; r <= 3; ++r)
    EXPECT_NEAR(s.second_moments_q[r - 1], s.cov_q(r, r) * (R - 1) / R + s.mean_q[r - 1] * s.mean_q[r - 1], 1e-12);
  // Tail mass only loses terms as the cut moves out.
  for (std::size_t j = 1; j < s.tail_mass.size(); ++j) EXPECT_LE(s.tail_mass[j], s.tail_mass[j - 1] + 1e-15);
  // Record level: Q_r and the alternative normalization differ by sqrt(K_n / n^alpha).
  for (const auto& rec : ex.records)
    for (int r = 0; r < 3; ++r)
      if (rec.q[r] != 0.0) {
        EXPECT_GT(rec.q[r] * rec.q_alt[r], 0.0);
      }
}

TEST(Experiment, MeanKScaledMatchesExact) {
  auto p = small_plan(1);
  p.replicates = 2000;
  p.n = 500;
  p.neg_grid = {};
  const auto s = run_experiment(p);
  const double want = mean_K(500, p.params) / std::pow(500.0, 0.5);
  // K_n / sqrt(n) has variance O(1); 2000 replicates give s.e. near 0.03.
  EXPECT_NEAR(s.mean_k_scaled, want, 0.1);
}

TEST(Jackknife, MatchesBruteForceLeaveOneOut) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  std::vector<double> x(57);
  std::vector<double> y(57);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = z(gen);
    y[i] = 0.4 * x[i] + z(gen);
  }
  auto cov = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0;
    double mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / (a.size() - 1.0);
  };
  const double R = x.size();
  std::vector<double> loo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xi = x;
    auto yi = y;
    xi.erase(xi.begin() + i);
    yi.erase(yi.begin() + i);
    loo.push_back(cov(xi, yi));
  }
  double m = 0;
  for (double v : loo) m += v;
  m /= R;
  double ss = 0;
  for (double v : loo) ss += (v - m) * (v - m);
  const auto [c, se] = detail::covariance_jackknife(x, y);
  EXPECT_NEAR(c, cov(x, y), 1e-14);
  EXPECT_NEAR(se, std::sqrt((R - 1) / R * ss), 1e-13);
}

TEST(MeanSe, Example) {
  const auto [m, se] = detail::mean_se({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(CompareCov, ProductAndClosedFormGiveSameReport) {
  const auto s = run_experiment(small_plan(1));
  const auto a = compare_cov(s, gamma_closed_form<double>(3, 0.5), 0.5);
  const auto b = compare_cov(s, gamma_via_product<double>(3, 0.5), 0.5);
  const auto c = compare_cov(s, ModelParams::make(0.5, 1.0), 3);
  ASSERT_EQ(a.entries.size(), 6u);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_NEAR(a.entries[i].expected, b.entries[i].expected, 1e-15);
    EXPECT_EQ(a.entries[i].within, b.entries[i].within);
    EXPECT_EQ(a.entries[i].expected, c.entries[i].expected);
  }
  EXPECT_EQ(dump(cov_report_json(a)), dump(cov_report_json(c)));
}

TEST(CompareCov, DimensionOneIsAVarianceCheck) {
  const auto s = run_experiment(small_plan(1));
  const auto rep = compare_cov(s, ModelParams::make(0.5, 1.0), 1);
  ASSERT_EQ(rep.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.entries[0].expected, 0.25);
  EXPECT_EQ(rep.entries[0].empirical, s.var_alpha_hat_scaled);
  EXPECT_TRUE(rep.signs_ok);
  EXPECT_THROW(compare_cov(s, ModelParams::make(0.5, 1.0), 4), std::invalid_argument);
}

TEST(CompareCov, FlagsAWrongMatrix) {
  const auto s = run_experiment(small_plan(1));
  auto wrong = gamma_closed_form<double>(3, 0.5);
  wrong(1, 1) = 1.0;
  wrong(1, 2) = wrong(2, 1) = 0.3;
  const auto rep = compare_cov(s, wrong, 0.5);
  EXPECT_FALSE(rep.all_within);
  EXPECT_FALSE(rep.passed());
}

TEST(CiCoverage, SmallNIsJustAFraction) {
  auto p = small_plan(1);
  p.n = 10;
  p.neg_grid = {};
  const double c = ci_coverage(p, 0.05);
  EXPECT_GE(c, 0.0);
  EXPECT_LE(c, 1.0);
  // Half-level intervals cover about half the time once K_n is moderate.
  p.n = 20000;
  p.replicates = 1000;
  EXPECT_NEAR(ci_coverage(p, 0.5), 0.5, 0.06);
}

TEST(ChiSquare, HandComputed) {
  // Expected 25 each; (30-25)^2/25 + (20-25)^2/25 = 2 on three degrees of freedom.
  const auto res = chi_square({30, 20, 25, 25}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_DOUBLE_EQ(res.statistic, 2.0);
  EXPECT_EQ(res.dof, 3);
  EXPECT_NEAR(res.p_value, 0.5724067, 1e-6);
  EXPECT_THROW(chi_square({1, 2}, {1.0}), std::invalid_argument);
}

TEST(ChiSquare, PoolsSparseCells) {
  // Cells with expectation 1 and 2 pool into one cell of 3.
  const auto res = chi_square({97, 1, 2}, {0.97, 0.01, 0.02});
  EXPECT_EQ(res.bins, 2);
  EXPECT_EQ(res.dof, 1);
  EXPECT_NEAR(res.statistic, 0.0, 1e-12);
  EXPECT_NEAR(res.p_value, 1.0, 1e-12);
}

TEST(Ks, UniformSample) {
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 1e-3);
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u;
  std::vector<double> xs(5000);
  for (auto& x : xs) x = u(gen);
  const auto good = ks_test(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_GT(good.p_value, 1e-3);
  const auto bad = ks_test(xs, [](double x) { return std::clamp(x * x, 0.0, 1.0); });
  EXPECT_LT(bad.p_value, 1e-6);
  // Three points at 0.5 against U(0,1): D = 0.5.
  EXPECT_DOUBLE_EQ(ks_test({0.5, 0.5, 0.5}, [](double x) { return x; }).statistic, 0.5);
}

TEST(NegMoments, RejectsOutsideHypothesis) {
  const auto par = ModelParams::make(0.5, 0.5);
  EXPECT_THROW(neg_moment_scan(par, 0.0, {10}, 10, 1), std::invalid_argument);
  EXPECT_THROW(neg_moment_scan(par, 2.0, {10}, 10, 1), std::invalid_argument);
  EXPECT_THROW(neg_moment_scan(ModelParams::make(0.5, -0.2), 0.5, {10}, 10, 1), std::invalid_argument);
  EXPECT_THROW(neg_moment_scan(par, 1.0, {}, 10, 1), std::invalid_argument);
  EXPECT_THROW(neg_moment_scan(par, 1.0, {10}, 1, 1), std::invalid_argument);
  EXPECT_NO_THROW(neg_moment_scan(par, 1.99, {10}, 10, 1));
}

TEST(NegMoments, SmallQNearOne) {
  const auto t = neg_moment_scan(ModelParams::make(0.5, 0.5), 1e-6, {10, 100, 1000}, 200, 9);
  for (const auto& p : t.points) EXPECT_NEAR(p.mean, 1.0, 1e-4);
  EXPECT_TRUE(t.bounded());
}

TEST(NegMoments, ExactAtSmallN) {
  const auto par = ModelParams::make(0.5, 0.5);
  const auto t = neg_moment_scan(par, 1.0, {2, 5, 8}, 200000, 21, 4);
  ASSERT_EQ(t.points.size(), 3u);
  for (const auto& pt : t.points) {
    double want = 0.0;
    for (std::int64_t k = 1; k <= pt.n; ++k)
      want += pmf_K(pt.n, k, par) * std::pow(static_cast<double>(pt.n), 0.5) / static_cast<double>(k);
    EXPECT_NEAR(pt.mean, want, 3 * pt.se) << pt.n;
  }
}

TEST(NegMoments, DeterministicAcrossThreads) {
  const auto par = ModelParams::make(0.5, 0.5);
  const auto a = neg_moment_scan(par, 1.0, {100, 1000}, 300, 4, 1);
  const auto b = neg_moment_scan(par, 1.0, {1000, 100}, 300, 4, 8);
  EXPECT_EQ(dump(neg_trace_json(a)), dump(neg_trace_json(b)));
}

TEST(SamplerLaw, SmallNPassesAndIsDeterministic) {
  const auto par = exact::parse_params("1/2", "1/2");
  const auto a = sampler_law_test(5, par, 100000, 11, 1);
  EXPECT_EQ(a.cells.size(), 7u);
  std::int64_t total = 0;
  for (auto o : a.observed) total += o;
  EXPECT_EQ(total, 100000);
  EXPECT_GT(a.chi.p_value, 1e-3);
  const auto b = sampler_law_test(5, par, 100000, 11, 8);
  EXPECT_EQ(dump(sampler_law_json(a)), dump(sampler_law_json(b)));
}

TEST(SamplerLaw, DetectsWrongParameters) {
  // Simulate at theta = 1/2 and test against theta = 2: must reject.
  const auto rep = sampler_law_test(6, exact::parse_params("1/2", "1/2"), 50000, 3);
  const auto wrong = enumerate_law(6, exact::parse_params("1/2", "2"));
  std::vector<double> probs;
  for (const auto& [c, p] : wrong.support) probs.push_back(to_double(p));
  EXPECT_LT(chi_square(rep.observed, probs).p_value, 1e-6);
}

TEST(MeanWithin, ExactReferenceAtSmallN) {
  auto p = small_plan(1);
  p.n = 500;
  p.replicates = 4000;
  p.neg_grid = {};
  const auto s = run_experiment(p);
  for (int r = 1; r <= 3; ++r) {
    EXPECT_TRUE(mean_within(s, r, p.params)) << r << " mean=" << s.mean_q[r - 1];
    EXPECT_EQ(mean_reference(500, r, p.params), mean_q(500, r, p.params));
  }
  // The finite-n mean is several standard errors away from zero here.
  EXPECT_GT(s.mean_q[0] / s.se_mean_q[0], 3.0);
}
