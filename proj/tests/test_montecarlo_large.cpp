// One experiment at alpha = 0.5, theta = 1, n = 1e5 with 1e4 replicates,
// shared by every test below. Takes about a minute on one core.

#include <cmath>

#include <gtest/gtest.h>

#include "ewpitman/montecarlo.hpp"

using namespace ewpitman;

namespace {

const ModelParams kParams = ModelParams::make(0.5, 1.0);

const EmpiricalSummary& summary() {
  static const EmpiricalSummary s = [] {
    ExperimentPlan p;
    p.params = kParams;
    p.n = 100000;
    p.replicates = 10000;
    p.d = 5;
    p.master_seed = 0x5eed2026;
    p.parallelism = default_parallelism();
    p.neg_grid = {100, 1000, 10000};
    return run_experiment(p);
  }();
  return s;
}

}  // namespace

TEST(Large, MeansMatchFiniteNCentering) {
  for (int r = 1; r <= 5; ++r)
    EXPECT_TRUE(mean_within(summary(), r, kParams))
        << "r=" << r << " mean=" << summary().mean_q[r - 1] << " se=" << summary().se_mean_q[r - 1]
        << " reference=" << mean_reference(summary().n, r, kParams);
}

TEST(Large, SecondMomentsNearLimitVariance) {
  const SibuyaDist sib(kParams.alpha);
  for (int r = 1; r <= 3; ++r) {
    const double p = sib.pmf(r);
    EXPECT_NEAR(summary().second_moments_q[r - 1] / (p * (1 - p)), 1.0, 0.10) << r;
  }
}

TEST(Large, EstimatorVarianceAndCoverage) {
  EXPECT_NEAR(summary().var_alpha_hat_scaled / 0.25, 1.0, 0.05);
  EXPECT_GE(summary().ci_coverage, 0.94);
  EXPECT_LE(summary().ci_coverage, 0.96);
}

TEST(Large, CovarianceMatchesGamma) {
  const auto rep = compare_cov(summary(), kParams, 5);
  for (const auto& e : rep.entries)
    EXPECT_TRUE(e.within) << e.i << "," << e.j << " empirical=" << e.empirical << " expected=" << e.expected
                          << " se=" << e.se;
  EXPECT_TRUE(rep.signs_ok);
}

TEST(Large, FirstCoordinateIsGaussian) {
  // The shape test: centred at the sample mean, since the finite-n mean is
  // several standard errors from zero (see MeansMatchFiniteNCentering).
  EXPECT_GT(summary().ks_shifted_p_value, 1e-3) << "D=" << summary().ks_shifted_statistic;
  RecordProperty("ks_p_value_zero_centred", std::to_string(summary().ks_p_value));
}

TEST(Large, TailMassDecreases) {
  const auto& t = summary().tail_mass;
  ASSERT_EQ(t.size(), 6u);
  for (std::size_t j = 1; j < t.size(); ++j) EXPECT_LT(t[j], t[j - 1]) << j;
  // Each tail tends to the matching tail of the trace of the limit covariance,
  // sum_{r > j} p(r)(1 - p(r)), over the block sizes a partition of n can have.
  const SibuyaDist sib(kParams.alpha);
  for (std::size_t j = 0; j < t.size(); ++j) {
    double want = 0.0;
    for (std::int64_t r = static_cast<std::int64_t>(j) + 1; r <= summary().n; ++r) want += sib.pmf(r) * (1 - sib.pmf(r));
    EXPECT_NEAR(t[j] / want, 1.0, 0.05) << j;
  }
}

TEST(Large, NegativeMomentsBounded) {
  const auto& trace = summary().neg_moment_trace;
  ASSERT_EQ(trace.size(), 3u);
  double lo = trace[0].mean;
  double hi = trace[0].mean;
  for (const auto& pt : trace) {
    lo = std::min(lo, pt.mean);
    hi = std::max(hi, pt.mean);
  }
  EXPECT_LT(hi / lo, 2.0);
}
