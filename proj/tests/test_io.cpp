#include <sstream>

#include <gtest/gtest.h>

#include "ewpitman/io.hpp"

using namespace ewpitman;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    ingest_partition_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Ingest, Examples) {
  const auto a = ingest_partition_text("1,5\n2,0\n");
  EXPECT_EQ(a.n(), 5);
  EXPECT_EQ(a.k_total(), 5);
  EXPECT_DOUBLE_EQ(alpha_hat(a.view()), 1.0);

  const auto b = ingest_partition_text("1,3\n2,2");
  EXPECT_EQ(b.n(), 7);
  EXPECT_EQ(b.k_total(), 5);
  EXPECT_DOUBLE_EQ(alpha_hat(b.view()), 0.6);
}

TEST(Ingest, CommentsBlanksAndSpaces) {
  const auto s = ingest_partition_text("# header\n\n 3 , 2   # two triples\r\n1,1\n\t\n");
  EXPECT_EQ(s.n(), 7);
  EXPECT_EQ(s.k_total(), 3);
  EXPECT_EQ(s.count(3), 2);
  EXPECT_EQ(s.count(2), 0);
}

TEST(Ingest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("1,2\n# c\nfoo\n"), 3u);
  EXPECT_EQ(error_line("1,2\n2\n"), 2u);
  EXPECT_EQ(error_line("1,2,3\n"), 1u);
  EXPECT_EQ(error_line("1,2\n2,1\n1,4\n"), 3u);
  EXPECT_EQ(error_line("1,-1\n"), 1u);
  EXPECT_EQ(error_line("0,3\n"), 1u);
  EXPECT_EQ(error_line("1,2x\n"), 1u);
  EXPECT_EQ(error_line("1,\n"), 1u);
  EXPECT_EQ(error_line("1.5,2\n"), 1u);
}

TEST(Ingest, EmptyData) {
  EXPECT_THROW(ingest_partition_text(""), EmptyDataError);
  EXPECT_THROW(ingest_partition_text("# nothing\n"), EmptyDataError);
  EXPECT_THROW(ingest_partition_text("1,0\n4,0\n"), EmptyDataError);
}

TEST(Ingest, RoundTripThroughWrite) {
  const auto params = ModelParams::make(0.4, 2.0);
  Rng gen(12);
  auto s = init(params);
  for (int i = 0; i < 3000; ++i) step(s, params, gen);
  std::ostringstream out;
  write_partition(out, s.view());
  EXPECT_EQ(out.str().rfind("# n=3001 K=" + std::to_string(s.k_total()) + "\n", 0), 0u);
  const auto back = ingest_partition_text(out.str());
  EXPECT_EQ(back.n(), s.n());
  EXPECT_EQ(back.k_total(), s.k_total());
  for (std::int64_t r = 1; r <= s.n(); ++r) EXPECT_EQ(back.count(r), s.count(r));
  const auto ci0 = alpha_ci(s.view(), 0.05);
  const auto ci1 = alpha_ci(back.view(), 0.05);
  EXPECT_EQ(ci0.center, ci1.center);
  EXPECT_EQ(ci0.low, ci1.low);
  EXPECT_EQ(ci0.high, ci1.high);
}

TEST(Trajectory, CsvShape) {
  const auto rec = run(ModelParams::make(0.5, 0.5), CheckpointSchedule::geometric(1000), 5, 7);
  std::ostringstream out;
  write_trajectory_csv(out, rec);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,K,K1,K2,K3,K4,K5");
  std::getline(in, line);
  EXPECT_EQ(line, "1,1,1,0,0,0,0");
  std::size_t rows = 1;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
  }
  EXPECT_EQ(rows, rec.checkpoints.size());
  EXPECT_EQ(last.rfind("1000,", 0), 0u);
}

TEST(Martingale, CsvRow) {
  std::ostringstream out;
  write_martingale_header(out);
  MartingaleTracker t(1, ModelParams::make(0.5, 0.5));
  t.observe(PartitionState::from_counts({0, 1}).view());
  write_martingale_row(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,r,S,M_scaled,qv_normalized");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1,1,", 0), 0u);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 123456.789}) EXPECT_EQ(std::stod(fmt17(x)), x);
  EXPECT_EQ(fmt17(0.5), "0.5");
}

TEST(Json, EstimateKeys) {
  const auto s = PartitionState::from_counts({0, 50, 50});
  const auto j = summary_json(s.view(), alpha_ci(s.view(), 0.05));
  for (const char* k : {"n", "K", "alpha_hat", "ci_low", "ci_high", "gamma"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["n"], 150);
  EXPECT_EQ(j["alpha_hat"], 0.5);
  // Doubles survive a dump/parse cycle unchanged.
  const auto back = json::parse(dump(j));
  EXPECT_EQ(back["ci_low"].get<double>(), j["ci_low"].get<double>());
}

TEST(Json, ReportsHaveStableKeys) {
  ExperimentPlan p;
  p.params = ModelParams::make(0.5, 1.0);
  p.n = 200;
  p.replicates = 20;
  p.d = 2;
  p.master_seed = 1;
  p.neg_grid = {50};
  const auto ex = run_experiment_full(p);
  const auto plan = plan_json(p);
  EXPECT_FALSE(plan.contains("parallelism"));
  EXPECT_EQ(plan["neg_grid"].size(), 1u);
  const auto sj = summary_json(ex.summary, 0.5);
  for (const char* k : {"mean_q", "cov_q", "var_alpha_hat_scaled", "ci_coverage", "second_moments_q",
                        "neg_moment_trace", "tail_mass", "ks_p_value"})
    EXPECT_TRUE(sj.contains(k)) << k;
  EXPECT_EQ(sj["cov_q"]["entries"].size(), 2u);
  const auto cr = cov_report_json(compare_cov(ex.summary, p.params, 2));
  EXPECT_EQ(cr["entries"].size(), 3u);
  EXPECT_TRUE(cr.contains("pass"));

  std::ostringstream raw;
  write_raw_csv(raw, ex);
  const std::string text = raw.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "replicate,K,alpha_hat,Q1,Q2");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 21);

  const auto oc = oracle_checks_json(oracle_suite(4, exact::parse_params("1/2", "1/2")));
  for (const auto& c : oc) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_EQ(c["pass"], true);
  }
  const auto sl = sampler_law_json(sampler_law_test(3, exact::parse_params("1/2", "1/2"), 100, 2));
  EXPECT_EQ(sl["cells"].size(), 3u);
  EXPECT_EQ(sl["cells"][0]["counts"].size(), 3u);
}
