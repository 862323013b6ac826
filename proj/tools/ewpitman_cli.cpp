// ewpitman_cli: simulate Ewens-Pitman partitions, estimate alpha, and run the
// verification suites from the command line.
//
// Exit codes: 0 success, 1 a check failed, 2 usage or parameter error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ewpitman/ewpitman.hpp"

namespace {

using namespace ewpitman;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// Raised for bad flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string alpha = "0.5";
  std::string theta = "0.5";
  std::int64_t n = 1000;
  std::int64_t replicates = 1000;
  int d = 3;
  std::uint64_t seed = 1;
  double gamma = 0.05;
  std::string output;
  std::string format = "csv";
  int threads = default_parallelism();

  // simulate
  double rho = 2.0;
  int martingale_r = 0;
  std::string dump_partition;
  // estimate
  std::string input;
  // verify-martingale
  int r_max = 8;
  std::int64_t states = 1000;
  std::int64_t fuzz_n_max = 200;
  // verify-cov
  std::string raw;
  // moments
  std::string stat = "mean-K";
  int r = 1;
  int p = 1;
  int q = 0;
  std::int64_t k = 1;
  std::string backend = "float";
  // oracle-check
  std::int64_t n_max = 8;
  bool custom_params = false;
  // neg-moments
  double neg_q = 1.0;
  std::vector<std::int64_t> grid{100, 1000, 10000, 100000};
  double threshold = 2.0;
};

ModelParams float_params(const Config& c) {
  return ModelParams::make(to_double(parse_rational(c.alpha)), to_double(parse_rational(c.theta)));
}

// Writes to --output if given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ExperimentPlan make_plan(const Config& c) {
  ExperimentPlan plan;
  plan.params = float_params(c);
  plan.n = c.n;
  plan.replicates = c.replicates;
  plan.d = c.d;
  plan.master_seed = c.seed;
  plan.parallelism = c.threads;
  plan.gamma = c.gamma;
  return plan;
}

int cmd_simulate(const Config& c) {
  const auto params = float_params(c);
  Sink sink(c.output);
  auto& out = sink.out();
  const auto schedule = CheckpointSchedule::geometric(c.n, 1.0, c.rho);

  if (c.martingale_r > 0) {
    params.require_asymptotic("simulate --martingale");
    MartingaleTracker tracker(c.martingale_r, params);
    Rng gen(c.seed);
    PartitionState state = init(params);
    tracker.observe(state.view());
    write_martingale_header(out);
    std::size_t next = 0;
    const auto pts = schedule.points();
    auto emit = [&] {
      while (next < pts.size() && pts[next] == state.n()) {
        write_martingale_row(out, tracker);
        ++next;
      }
    };
    emit();
    while (state.n() < c.n) {
      step(state, params, gen);
      tracker.observe(state.view());
      emit();
    }
    return kExitOk;
  }

  if (c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
  Rng gen(c.seed);
  TrajectoryRecord rec;
  rec.depth = c.d;
  PartitionState last = init(params);
  simulate(params, schedule, gen, [&](const PartitionState& s) {
    Checkpoint cp{s.n(), s.k_total(), std::vector<std::int64_t>(c.d)};
    for (int r = 1; r <= c.d; ++r) cp.counts[r - 1] = s.count(r);
    rec.checkpoints.push_back(std::move(cp));
    if (s.n() == c.n) last = s;
  });
  if (c.format == "csv") {
    write_trajectory_csv(out, rec);
  } else {
    json rows = json::array();
    for (const auto& cp : rec.checkpoints) {
      json row{{"n", cp.n}, {"K", cp.k_total}, {"counts", cp.counts}};
      if (params.asymptotic_regime()) {
        row["alpha_hat"] = static_cast<double>(cp.counts[0]) / static_cast<double>(cp.k_total);
      }
      rows.push_back(row);
    }
    out << dump(json{{"alpha", params.alpha}, {"theta", params.theta}, {"seed", c.seed}, {"d", c.d},
                     {"checkpoints", rows}})
        << "\n";
  }
  if (!c.dump_partition.empty()) {
    std::ofstream part(c.dump_partition);
    if (!part) throw UsageError("cannot open '" + c.dump_partition + "'");
    write_partition(part, last.view());
  }
  return kExitOk;
}

int cmd_estimate(const Config& c) {
  PartitionState state = PartitionState::initial();
  if (!c.input.empty()) {
    std::ifstream in(c.input);
    if (!in) throw UsageError("cannot open input file '" + c.input + "'");
    state = ingest_partition(in);
  } else {
    const auto params = float_params(c);
    Rng gen(c.seed);
    state = init(params, StorageMode::kCountsOnly);
    while (state.n() < c.n) step(state, params, gen);
  }
  const auto ci = alpha_ci(state.view(), c.gamma);
  json j = summary_json(state.view(), ci);
  j["clipped"] = ci.clipped;
  j["degenerate"] = ci.degenerate;
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  return kExitOk;
}

int cmd_verify_cov(const Config& c) {
  const auto plan = make_plan(c);
  const auto ex = run_experiment_full(plan);
  const auto report = compare_cov(ex.summary, plan.params, plan.d);
  const double lemma = lemma_cov_check(plan.d, plan.params.alpha);
  json j{{"plan", plan_json(plan)},
         {"summary", summary_json(ex.summary, plan.params.alpha)},
         {"gamma_matrix", matrix_json(gamma_closed_form<double>(plan.d, plan.params.alpha), plan.params.alpha)},
         {"lemma_cov_max_error", lemma},
         {"comparison", cov_report_json(report)}};
  const bool ok = report.passed() && lemma < 1e-10;
  j["pass"] = ok;
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  if (!c.raw.empty()) {
    std::ofstream raw(c.raw);
    if (!raw) throw UsageError("cannot open '" + c.raw + "'");
    write_raw_csv(raw, ex);
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify_martingale(const Config& c) {
  const auto params = float_params(c);
  params.require_asymptotic("verify-martingale");
  if (c.r_max < 1 || c.states < 1 || c.fuzz_n_max < c.r_max)
    throw UsageError("need --r-max >= 1, --states >= 1 and --n-max >= --r-max");
  Rng gen(c.seed);
  json per_r = json::array();
  double worst = 0.0;
  for (int r = 1; r <= c.r_max; ++r) {
    const MartingaleCoeffs<double> coeffs(r, params.alpha, params.theta);
    double worst_r = 0.0;
    for (std::int64_t i = 0; i < c.states; ++i) {
      const auto target =
          r + static_cast<std::int64_t>(uniform_below(gen, static_cast<std::uint64_t>(c.fuzz_n_max - r + 1)));
      PartitionState s = init(params);
      while (s.n() < target) step(s, params, gen);
      const auto v = s.view();
      const double a_n = coeffs.a(v.n);
      const double lhs = coeffs.one_step_expectation(v);
      const double rhs = coeffs.M_with(v, a_n);
      const double scale = coeffs.magnitude(v, coeffs.a(v.n + 1));
      worst_r = std::max(worst_r, std::fabs(lhs - rhs) / scale);
    }
    worst = std::max(worst, worst_r);
    per_r.push_back(json{{"r", r}, {"max_rel_error", worst_r}});
  }
  const bool ok = worst <= 1e-10;
  json j{{"alpha", params.alpha}, {"theta", params.theta},      {"states_per_r", c.states},
         {"n_max", c.fuzz_n_max}, {"seed", c.seed},             {"per_r", per_r},
         {"max_rel_error", worst}, {"tolerance", 1e-10},        {"pass", ok}};
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_moments(const Config& c) {
  if (c.backend != "float" && c.backend != "exact") throw UsageError("--backend must be float or exact");
  json j{{"stat", c.stat}, {"n", c.n}, {"r", c.r}, {"p", c.p}, {"q", c.q}};
  if (c.stat == "pmf-K" || c.stat == "conditional-Kr") j["k"] = c.k;

  if (c.backend == "exact") {
    const auto par = exact::parse_params(c.alpha, c.theta);
    const exact::Engine<Rational> eng(c.n, par);
    Rational v;
    if (c.stat == "pmf-K") v = eng.pmf_K(c.n, c.k);
    else if (c.stat == "mean-K") v = eng.mean_K(c.n);
    else if (c.stat == "mean-Kr") v = eng.mean_Kr(c.n, c.r);
    else if (c.stat == "factorial-Kr") v = eng.factorial_moment_Kr(c.n, c.r, c.p);
    else if (c.stat == "joint") v = eng.joint_moment(c.n, c.r, c.p, c.q);
    else if (c.stat == "conditional-Kr") v = eng.conditional_moment_Kr(c.n, c.k, c.r, c.p);
    else if (c.stat == "sibuya-sum") v = exact::sibuya_sum_pmf<Rational>(c.k, c.n, par.alpha);
    else throw UsageError("unknown --stat '" + c.stat + "' for the exact backend");
    j["value"] = to_double(v);
    j["exact"] = v.str();
  } else {
    const auto params = float_params(c);
    require_moment_params(params);
    double v = 0.0;
    if (c.stat == "pmf-K") v = pmf_K(c.n, c.k, params);
    else if (c.stat == "mean-K") v = mean_K(c.n, params);
    else if (c.stat == "mean-Kr") v = mean_Kr(c.n, c.r, params);
    else if (c.stat == "factorial-Kr") v = factorial_moment_Kr(c.n, c.r, c.p, params);
    else if (c.stat == "joint") v = joint_moment(c.n, c.r, c.p, c.q, params);
    else if (c.stat == "conditional-Kr") v = conditional_moment_Kr(c.n, c.k, c.r, c.p, params);
    else if (c.stat == "sibuya-sum") v = sibuya_sum_pmf(c.k, c.n, params.alpha);
    else if (c.stat == "second-moment-Q") v = second_moment_q(c.n, c.r, params);
    else throw UsageError("unknown --stat '" + c.stat + "'");
    j["value"] = v;
  }
  j["backend"] = c.backend;
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  return kExitOk;
}

int cmd_oracle_check(const Config& c) {
  if (c.n_max < 1 || c.n_max > kOracleMaxN) throw UsageError("--n-max must lie in [1, 10]");
  std::vector<std::pair<std::string, std::string>> grid;
  if (c.custom_params) {
    grid.emplace_back(c.alpha, c.theta);
  } else {
    for (const char* a : {"1/4", "1/2", "3/4"})
      for (const char* t : {"-1/8", "1/2", "2"}) grid.emplace_back(a, t);
  }
  bool all_ok = true;
  json runs = json::array();
  for (const auto& [a, t] : grid) {
    const auto checks = oracle_suite(c.n_max, exact::parse_params(a, t));
    bool ok = true;
    for (const auto& ch : checks) ok = ok && ch.passed;
    all_ok = all_ok && ok;
    runs.push_back(json{{"alpha", a}, {"theta", t}, {"checks", oracle_checks_json(checks)}, {"pass", ok}});
  }
  Sink sink(c.output);
  sink.out() << dump(json{{"n_max", c.n_max}, {"runs", runs}, {"pass", all_ok}}) << "\n";
  return all_ok ? kExitOk : kExitCheckFailed;
}

int cmd_ci_coverage(const Config& c) {
  const auto plan = make_plan(c);
  const double coverage = ci_coverage(plan, c.gamma);
  const double se = std::sqrt(coverage * (1.0 - coverage) / static_cast<double>(plan.replicates));
  // No coverage claim is made before the asymptotic regime sets in.
  constexpr std::int64_t kVerdictMinN = 10000;
  json j{{"plan", plan_json(plan)}, {"coverage", coverage}, {"se", se}, {"nominal", 1.0 - c.gamma}};
  int code = kExitOk;
  if (plan.n < kVerdictMinN) {
    j["diagnostic_only"] = true;
  } else {
    const bool ok = std::fabs(coverage - (1.0 - c.gamma)) <= 0.01;
    j["diagnostic_only"] = false;
    j["pass"] = ok;
    code = ok ? kExitOk : kExitCheckFailed;
  }
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  return code;
}

int cmd_neg_moments(const Config& c) {
  const auto params = float_params(c);
  const auto trace = neg_moment_scan(params, c.neg_q, c.grid, c.replicates, c.seed, c.threads, c.threshold);
  json j{{"alpha", params.alpha}, {"theta", params.theta}, {"replicates", c.replicates}, {"seed", c.seed},
         {"trace", neg_trace_json(trace)}, {"pass", trace.bounded()}};
  Sink sink(c.output);
  sink.out() << dump(j) << "\n";
  return trace.bounded() ? kExitOk : kExitCheckFailed;
}

void add_model_flags(CLI::App* sub, Config& c) {
  sub->add_option("--alpha", c.alpha, "discount parameter alpha in [0,1); decimal or p/q")->capture_default_str();
  sub->add_option("--theta", c.theta, "concentration parameter theta > -alpha; decimal or p/q")->capture_default_str();
}

void add_plan_flags(CLI::App* sub, Config& c) {
  add_model_flags(sub, c);
  sub->add_option("--n", c.n, "sample size of each trajectory")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--replicates", c.replicates, "number of independent trajectories")
      ->capture_default_str()
      ->check(CLI::Range(std::int64_t{2}, std::numeric_limits<std::int64_t>::max()));
  sub->add_option("--d", c.d, "number of block sizes tracked")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--gamma", c.gamma, "confidence interval level: the interval has coverage 1-gamma")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--output,-o", c.output, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ewens-Pitman partitions: simulation, estimation of alpha, and verification suites"};
  app.require_subcommand(1);
  Config c;

  auto* sim = app.add_subcommand("simulate", "simulate one trajectory and print checkpoints (n,K,K1..Kd)");
  add_model_flags(sim, c);
  sim->add_option("--n", c.n, "final sample size")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--d", c.d, "number of block sizes recorded")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sim->add_option("--rho", c.rho, "ratio of the geometric checkpoint schedule")->capture_default_str();
  sim->add_option("--format", c.format, "csv or json")->capture_default_str();
  sim->add_option("--martingale", c.martingale_r,
                  "instead of counts, print n,r,S,M_scaled,qv_normalized for the martingale of this order");
  sim->add_option("--dump-partition", c.dump_partition, "also write the final partition as r,count lines");
  sim->add_option("--output,-o", c.output, "write here instead of stdout");

  auto* est = app.add_subcommand("estimate", "alpha_hat and its confidence interval as JSON");
  add_model_flags(est, c);
  est->add_option("--input,-i", c.input, "partition file of r,count lines ('#' starts a comment)");
  est->add_option("--n", c.n, "sample size when simulating")->capture_default_str()->check(CLI::PositiveNumber);
  est->add_option("--seed", c.seed, "random seed when simulating")->capture_default_str();
  est->add_option("--gamma", c.gamma, "interval level: coverage 1-gamma")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  est->add_option("--output,-o", c.output, "write here instead of stdout");

  auto* cov = app.add_subcommand("verify-cov", "empirical covariance of Q against diag(p) - p p^T");
  add_plan_flags(cov, c);
  cov->add_option("--raw", c.raw, "write per-replicate K, alpha_hat, Q_1..Q_d as CSV");

  auto* mart = app.add_subcommand("verify-martingale", "one-step conditional mean of M_r against M_r on random states");
  add_model_flags(mart, c);
  mart->add_option("--r-max", c.r_max, "largest martingale order")->capture_default_str();
  mart->add_option("--states", c.states, "random states per order")->capture_default_str();
  mart->add_option("--n-max", c.fuzz_n_max, "largest sample size of a random state")->capture_default_str();
  mart->add_option("--seed", c.seed, "random seed")->capture_default_str();
  mart->add_option("--output,-o", c.output, "write here instead of stdout");

  auto* mom = app.add_subcommand("moments", "closed-form finite-n moments");
  add_model_flags(mom, c);
  mom->add_option("--n", c.n, "sample size")->capture_default_str()->check(CLI::PositiveNumber);
  mom->add_option("--stat", c.stat,
                  "pmf-K | mean-K | mean-Kr | factorial-Kr | joint | conditional-Kr | sibuya-sum | second-moment-Q")
      ->capture_default_str();
  mom->add_option("--r", c.r, "block size r")->capture_default_str();
  mom->add_option("--p", c.p, "power of K_r")->capture_default_str();
  mom->add_option("--q", c.q, "power of K_n (may be negative)")->capture_default_str();
  mom->add_option("--k", c.k, "number of blocks (pmf-K, conditional-Kr) or summands (sibuya-sum)")->capture_default_str();
  mom->add_option("--backend", c.backend, "float or exact (exact needs rational alpha and theta)")->capture_default_str();
  mom->add_option("--output,-o", c.output, "write here instead of stdout");

  auto* orc = app.add_subcommand("oracle-check", "compare every closed form with exhaustive enumeration");
  orc->add_option("--n-max", c.n_max, "largest n enumerated (at most 10)")->capture_default_str();
  auto* oa = orc->add_option("--alpha", c.alpha, "single alpha instead of the default grid {1/4,1/2,3/4}");
  auto* ot = orc->add_option("--theta", c.theta, "single theta instead of the default grid {-1/8,1/2,2}");
  oa->needs(ot);
  ot->needs(oa);
  orc->add_option("--output,-o", c.output, "write here instead of stdout");

  auto* cic = app.add_subcommand("ci-coverage", "coverage of the interval for alpha over replicates");
  add_plan_flags(cic, c);

  auto* neg = app.add_subcommand("neg-moments", "E[(K_n/n^alpha)^-q] along a grid of n");
  add_model_flags(neg, c);
  neg->add_option("--q", c.neg_q, "order of the negative moment, 0 < q < 1 + theta/alpha")->capture_default_str();
  neg->add_option("--grid", c.grid, "sample sizes")->capture_default_str()->delimiter(',');
  neg->add_option("--replicates", c.replicates, "trajectories")->capture_default_str();
  neg->add_option("--seed", c.seed, "master seed")->capture_default_str();
  neg->add_option("--threads", c.threads, "worker threads (results do not depend on it)")->capture_default_str();
  neg->add_option("--threshold", c.threshold, "largest acceptable max/min ratio")->capture_default_str();
  neg->add_option("--output,-o", c.output, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  c.custom_params = orc->parsed() && oa->count() > 0;

  try {
    if (sim->parsed()) return cmd_simulate(c);
    if (est->parsed()) return cmd_estimate(c);
    if (cov->parsed()) return cmd_verify_cov(c);
    if (mart->parsed()) return cmd_verify_martingale(c);
    if (mom->parsed()) return cmd_moments(c);
    if (orc->parsed()) return cmd_oracle_check(c);
    if (cic->parsed()) return cmd_ci_coverage(c);
    if (neg->parsed()) return cmd_neg_moments(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EmptyDataError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
