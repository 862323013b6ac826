#pragma once

// Text formats: trajectory and martingale CSV, JSON reports, and ingestion of
// frequency-of-frequencies files ("r,count" per line, '#' comments).

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ewpitman/covariance.hpp"
#include "ewpitman/martingale.hpp"
#include "ewpitman/montecarlo.hpp"
#include "ewpitman/oracle.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/statistics.hpp"

namespace ewpitman {

using json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip a double.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& field, std::size_t line, const char* what) {
  const std::string t = trim(field);
  if (t.empty()) throw ParseError(line, std::string("missing ") + what);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("bad ") + what + " '" + t + "'");
  }
  if (used != t.size()) throw ParseError(line, std::string("bad ") + what + " '" + t + "'");
  return v;
}

}  // namespace detail

/// Rebuilds a counts-only partition from "r,count" lines. A size may appear
/// at most once; counts must be non-negative.
inline PartitionState ingest_partition(std::istream& in) {
  std::vector<std::int64_t> counts(1, 0);
  std::vector<bool> seen(1, false);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError(line, "expected 'r,count'");
    if (body.find(',', comma + 1) != std::string::npos) throw ParseError(line, "too many fields");
    const std::int64_t r = detail::parse_int(body.substr(0, comma), line, "size");
    const std::int64_t c = detail::parse_int(body.substr(comma + 1), line, "count");
    if (r < 1) throw ParseError(line, "size must be >= 1");
    if (c < 0) throw ParseError(line, "count must be >= 0");
    if (static_cast<std::size_t>(r) >= counts.size()) {
      counts.resize(r + 1, 0);
      seen.resize(r + 1, false);
    }
    if (seen[r]) throw ParseError(line, "size " + std::to_string(r) + " listed twice");
    seen[r] = true;
    counts[r] = c;
  }
  std::int64_t n = 0;
  for (std::size_t r = 1; r < counts.size(); ++r) n += static_cast<std::int64_t>(r) * counts[r];
  if (n == 0) throw EmptyDataError("partition has no elements (n = 0)");
  return PartitionState::from_counts(std::move(counts));
}

inline PartitionState ingest_partition_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_partition(in);
}

/// Inverse of ingest_partition: one "r,count" line per occupied size.
inline void write_partition(std::ostream& out, const CountsView& v) {
  out << "# n=" << v.n << " K=" << v.k_total << "\n";
  for (std::int64_t r = 1; r <= v.max_size(); ++r)
    if (v.count(r) > 0) out << r << "," << v.count(r) << "\n";
}

inline void write_trajectory_header(std::ostream& out, int d) {
  out << "n,K";
  for (int r = 1; r <= d; ++r) out << ",K" << r;
  out << "\n";
}

inline void write_trajectory_row(std::ostream& out, const Checkpoint& cp) {
  out << cp.n << "," << cp.k_total;
  for (auto c : cp.counts) out << "," << c;
  out << "\n";
}

inline void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& rec) {
  write_trajectory_header(out, rec.depth);
  for (const auto& cp : rec.checkpoints) write_trajectory_row(out, cp);
}

inline json summary_json(const CountsView& v, const ConfidenceInterval& ci) {
  return json{{"n", v.n}, {"K", v.k_total}, {"alpha_hat", ci.center}, {"ci_low", ci.low}, {"ci_high", ci.high},
              {"gamma", ci.gamma}};
}

inline void write_martingale_header(std::ostream& out) { out << "n,r,S,M_scaled,qv_normalized\n"; }

inline void write_martingale_row(std::ostream& out, const MartingaleTracker& t) {
  out << t.n() << "," << t.r() << "," << fmt17(t.S()) << "," << fmt17(t.M_scaled()) << ","
      << fmt17(t.qv_normalized()) << "\n";
}

inline json matrix_json(const CovMatrix<double>& m, double alpha) {
  return json{{"d", m.d()}, {"alpha", alpha}, {"entries", m.rows()}};
}

inline json plan_json(const ExperimentPlan& p) {
  // parallelism is deliberately left out: reports must not depend on it.
  json j{{"alpha", p.params.alpha}, {"theta", p.params.theta}, {"n", p.n},         {"replicates", p.replicates},
         {"d", p.d},                {"seed", p.master_seed},    {"gamma", p.gamma}};
  if (!p.neg_grid.empty()) {
    j["neg_grid"] = p.neg_grid;
    j["neg_q"] = p.neg_q;
  }
  return j;
}

inline json summary_json(const EmpiricalSummary& s, double alpha) {
  json trace = json::array();
  for (const auto& pt : s.neg_moment_trace) trace.push_back(json{{"n", pt.n}, {"mean", pt.mean}, {"se", pt.se}});
  return json{{"n", s.n},
              {"replicates", s.replicates},
              {"d", s.d},
              {"mean_q", s.mean_q},
              {"se_mean_q", s.se_mean_q},
              {"cov_q", matrix_json(s.cov_q, alpha)},
              {"cov_q_se", matrix_json(s.cov_q_se, alpha)},
              {"cov_q_alt", matrix_json(s.cov_q_alt, alpha)},
              {"var_alpha_hat_scaled", s.var_alpha_hat_scaled},
              {"gamma", s.gamma},
              {"ci_coverage", s.ci_coverage},
              {"second_moments_q", s.second_moments_q},
              {"tail_mass", s.tail_mass},
              {"mean_k_scaled", s.mean_k_scaled},
              {"neg_q", s.neg_q},
              {"neg_moment_trace", trace},
              {"ks_statistic", s.ks_statistic},
              {"ks_p_value", s.ks_p_value},
              {"ks_shifted_statistic", s.ks_shifted_statistic},
              {"ks_shifted_p_value", s.ks_shifted_p_value}};
}

inline json cov_report_json(const CovReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(json{{"i", e.i},
                           {"j", e.j},
                           {"empirical", e.empirical},
                           {"expected", e.expected},
                           {"abs_error", e.abs_error},
                           {"se", e.se},
                           {"allowance", e.allowance},
                           {"within", e.within},
                           {"sign_ok", e.sign_ok}});
  return json{{"d", r.d},
              {"tolerance", "3 jackknife s.e. + heuristic allowance n^(-alpha/2) sqrt(G_ii G_jj)"},
              {"entries", entries},
              {"all_within", r.all_within},
              {"signs_ok", r.signs_ok},
              {"pass", r.passed()}};
}

inline json oracle_checks_json(const std::vector<OracleCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks)
    out.push_back(json{{"name", c.name},
                       {"max_abs_error", c.max_abs_error},
                       {"max_rel_error", c.max_rel_error},
                       {"exact_match", c.exact_match},
                       {"pass", c.passed}});
  return out;
}

inline json neg_trace_json(const NegMomentTrace& t) {
  json pts = json::array();
  for (const auto& p : t.points) pts.push_back(json{{"n", p.n}, {"mean", p.mean}, {"se", p.se}});
  return json{{"q", t.q}, {"points", pts}, {"max_min_ratio", t.max_min_ratio}, {"threshold", t.threshold},
              {"bounded", t.bounded()}};
}

inline json sampler_law_json(const SamplerLawReport& r) {
  json cells = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    std::vector<std::int64_t> k(r.cells[i].begin() + 1, r.cells[i].end());
    cells.push_back(json{{"counts", k}, {"probability", r.probabilities[i]}, {"observed", r.observed[i]}});
  }
  return json{{"n", r.n},
              {"replicates", r.replicates},
              {"cells", cells},
              {"chi_square", r.chi.statistic},
              {"dof", r.chi.dof},
              {"p_value", r.chi.p_value}};
}

/// Per-replicate raw CSV: alpha_hat, Q_1..Q_d.
inline void write_raw_csv(std::ostream& out, const Experiment& ex) {
  out << "replicate,K,alpha_hat";
  for (int r = 1; r <= ex.plan.d; ++r) out << ",Q" << r;
  out << "\n";
  for (std::size_t i = 0; i < ex.records.size(); ++i) {
    const auto& rec = ex.records[i];
    out << i << "," << rec.k_total << "," << fmt17(rec.alpha_hat);
    for (double q : rec.q) out << "," << fmt17(q);
    out << "\n";
  }
}

/// Doubles are printed by nlohmann's shortest round-trip formatting, which
/// carries the same information as 17 significant digits.
inline std::string dump(const json& j, int indent = 2) { return j.dump(indent); }

}  // namespace ewpitman
