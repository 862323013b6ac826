#pragma once

// Sequential (Chinese restaurant) construction of an Ewens-Pitman partition.
//
// Element n+1 opens a new block with probability (alpha K_n + theta)/(n + theta)
// and otherwise joins block i with probability (n_i - alpha)/(n + theta).
// The state keeps the size histogram K_{r,n} up to date in O(1) per step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewpitman/random.hpp"

namespace ewpitman {

struct ModelParams {
  double alpha = 0.5;
  double theta = 0.5;

  /// Throws std::invalid_argument unless alpha in [0,1) and theta > -alpha.
  static ModelParams make(double alpha, double theta) {
    ModelParams p{alpha, theta};
    p.validate();
    return p;
  }

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
    if (!(theta > -alpha)) throw std::invalid_argument("theta must exceed -alpha");
  }

  /// The regime of the limit theorems: alpha in (0,1) and alpha + theta > 0.
  bool asymptotic_regime() const { return alpha > 0.0 && alpha < 1.0 && alpha + theta > 0.0; }

  void require_asymptotic(const char* who) const {
    if (!asymptotic_regime()) {
      throw std::invalid_argument(std::string(who) + ": requires alpha in (0,1) and alpha + theta > 0");
    }
  }
};

/// Read-only view of the block-size histogram. counts[r] = K_{r,n} for
/// 1 <= r < counts.size(); counts[0] is unused and zero.
struct CountsView {
  std::int64_t n = 0;
  std::int64_t k_total = 0;
  std::span<const std::int64_t> counts;

  std::int64_t count(std::int64_t r) const {
    return (r >= 1 && r < static_cast<std::int64_t>(counts.size())) ? counts[r] : 0;
  }
  std::int64_t max_size() const { return static_cast<std::int64_t>(counts.size()) - 1; }
};

enum class StorageMode {
  kElements,    // element -> block map; O(1) expected block selection
  kCountsOnly,  // histogram only; selection scans the distinct sizes present
};

class PartitionState {
 public:
  /// One element in one block.
  static PartitionState initial(StorageMode mode = StorageMode::kElements) {
    PartitionState s;
    s.mode_ = mode;
    s.n_ = 1;
    s.k_total_ = 1;
    s.size_counts_ = {0, 1};
    if (mode == StorageMode::kElements) {
      s.element_block_ = {0};
      s.block_sizes_ = {1};
    } else {
      s.note_size_present(1);
    }
    return s;
  }

  /// Counts-only state from a histogram (index 0 ignored). Throws on negative
  /// entries or an empty partition.
  static PartitionState from_counts(std::vector<std::int64_t> counts) {
    if (counts.empty()) counts.push_back(0);
    counts[0] = 0;
    PartitionState s;
    s.mode_ = StorageMode::kCountsOnly;
    for (std::size_t r = 1; r < counts.size(); ++r) {
      if (counts[r] < 0) throw std::invalid_argument("from_counts: negative count");
      s.n_ += static_cast<std::int64_t>(r) * counts[r];
      s.k_total_ += counts[r];
    }
    if (s.n_ == 0) throw std::invalid_argument("from_counts: empty partition");
    while (counts.size() > 2 && counts.back() == 0) counts.pop_back();
    s.size_counts_ = std::move(counts);
    for (std::size_t r = 1; r < s.size_counts_.size(); ++r) {
      if (s.size_counts_[r] > 0) s.note_size_present(static_cast<std::int64_t>(r));
    }
    return s;
  }

  StorageMode mode() const { return mode_; }
  std::int64_t n() const { return n_; }
  std::int64_t k_total() const { return k_total_; }
  std::int64_t count(std::int64_t r) const {
    return (r >= 1 && r < static_cast<std::int64_t>(size_counts_.size())) ? size_counts_[r] : 0;
  }
  std::span<const std::int64_t> size_counts() const { return size_counts_; }
  CountsView view() const { return CountsView{n_, k_total_, size_counts_}; }

  std::span<const std::int32_t> element_block() const { return element_block_; }
  std::span<const std::int64_t> block_sizes() const { return block_sizes_; }

  /// Element n+1 starts a new block.
  void add_singleton() {
    if (mode_ == StorageMode::kElements) {
      element_block_.push_back(static_cast<std::int32_t>(block_sizes_.size()));
      block_sizes_.push_back(1);
    }
    shift_count(0);
    ++k_total_;
    ++n_;
  }

  /// Element n+1 joins block `block` (element mode).
  void join_block(std::int64_t block) {
    const std::int64_t size = block_sizes_[block];
    element_block_.push_back(static_cast<std::int32_t>(block));
    ++block_sizes_[block];
    shift_count(size);
    ++n_;
  }

  /// Element n+1 joins some block of size `size` (counts-only mode).
  void join_size_class(std::int64_t size) {
    if (count(size) <= 0) throw std::logic_error("join_size_class: no block of that size");
    shift_count(size);
    ++n_;
  }

  /// Sizes with K_{r,n} > 0 (counts-only mode), in no particular order.
  std::span<const std::int64_t> present_sizes() const { return present_sizes_; }

  /// Throws std::logic_error if the histogram disagrees with n or K_n, or with
  /// the block table in element mode.
  void check_invariants() const {
    std::int64_t n_sum = 0;
    std::int64_t k_sum = 0;
    for (std::size_t r = 1; r < size_counts_.size(); ++r) {
      n_sum += static_cast<std::int64_t>(r) * size_counts_[r];
      k_sum += size_counts_[r];
    }
    if (n_sum != n_ || k_sum != k_total_) {
      std::ostringstream os;
      os << "partition invariant broken: sum r K_r = " << n_sum << " (n = " << n_ << "), sum K_r = " << k_sum
         << " (K = " << k_total_ << ")";
      throw std::logic_error(os.str());
    }
    if (mode_ == StorageMode::kElements) {
      if (static_cast<std::int64_t>(element_block_.size()) != n_ ||
          static_cast<std::int64_t>(block_sizes_.size()) != k_total_) {
        throw std::logic_error("partition invariant broken: block table size mismatch");
      }
      std::vector<std::int64_t> hist(block_sizes_.size(), 0);
      for (auto b : element_block_) ++hist[b];
      if (!std::equal(hist.begin(), hist.end(), block_sizes_.begin())) {
        throw std::logic_error("partition invariant broken: block sizes disagree with element map");
      }
    }
  }

 private:
  // A block of size `from` (0 = new block) becomes a block of size from+1.
  void shift_count(std::int64_t from) {
    const std::int64_t to = from + 1;
    if (to >= static_cast<std::int64_t>(size_counts_.size())) size_counts_.resize(to + 1, 0);
    if (from >= 1) {
      if (--size_counts_[from] == 0 && mode_ == StorageMode::kCountsOnly) note_size_absent(from);
    }
    if (size_counts_[to]++ == 0 && mode_ == StorageMode::kCountsOnly) note_size_present(to);
  }

  void note_size_present(std::int64_t r) {
    if (r >= static_cast<std::int64_t>(present_pos_.size())) present_pos_.resize(r + 1, -1);
    present_pos_[r] = static_cast<std::int64_t>(present_sizes_.size());
    present_sizes_.push_back(r);
  }

  void note_size_absent(std::int64_t r) {
    const std::int64_t pos = present_pos_[r];
    const std::int64_t last = present_sizes_.back();
    present_sizes_[pos] = last;
    present_pos_[last] = pos;
    present_sizes_.pop_back();
    present_pos_[r] = -1;
  }

  StorageMode mode_ = StorageMode::kElements;
  std::int64_t n_ = 0;
  std::int64_t k_total_ = 0;
  std::vector<std::int64_t> size_counts_;
  std::vector<std::int32_t> element_block_;
  std::vector<std::int64_t> block_sizes_;
  std::vector<std::int64_t> present_sizes_;
  std::vector<std::int64_t> present_pos_;
};

inline PartitionState init(const ModelParams& params, StorageMode mode = StorageMode::kElements) {
  params.validate();
  return PartitionState::initial(mode);
}

namespace detail {

// Above this alpha the acceptance probability of the rejection step can get
// small; fall back to a linear scan over blocks.
inline constexpr double kRejectionAlphaLimit = 0.95;

template <class Gen>
std::int64_t pick_block_by_scan(const PartitionState& state, double alpha, Gen& gen) {
  const auto sizes = state.block_sizes();
  const double total = static_cast<double>(state.n()) - alpha * static_cast<double>(state.k_total());
  double target = uniform01(gen) * total;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    target -= static_cast<double>(sizes[b]) - alpha;
    if (target < 0.0) return static_cast<std::int64_t>(b);
  }
  return static_cast<std::int64_t>(sizes.size()) - 1;
}

template <class Gen>
std::int64_t pick_size_class(const PartitionState& state, double alpha, Gen& gen) {
  const auto present = state.present_sizes();
  const double total = static_cast<double>(state.n()) - alpha * static_cast<double>(state.k_total());
  double target = uniform01(gen) * total;
  for (auto r : present) {
    target -= static_cast<double>(state.count(r)) * (static_cast<double>(r) - alpha);
    if (target < 0.0) return r;
  }
  return present.back();
}

}  // namespace detail

/// One step of the sequential construction.
template <class Gen>
void step(PartitionState& state, const ModelParams& params, Gen& gen) {
  const double n = static_cast<double>(state.n());
  const double k = static_cast<double>(state.k_total());
  if (uniform01(gen) * (n + params.theta) < params.alpha * k + params.theta) {
    state.add_singleton();
  } else if (state.mode() == StorageMode::kCountsOnly) {
    state.join_size_class(detail::pick_size_class(state, params.alpha, gen));
  } else if (params.alpha > detail::kRejectionAlphaLimit) {
    state.join_block(detail::pick_block_by_scan(state, params.alpha, gen));
  } else {
    // A uniform element lands in block i with probability n_i / n; accepting
    // with probability (n_i - alpha)/n_i leaves weights proportional to n_i - alpha.
    const auto elements = state.element_block();
    const auto sizes = state.block_sizes();
    const auto n_int = static_cast<std::uint64_t>(state.n());
    for (;;) {
      const std::int64_t b = elements[uniform_below(gen, n_int)];
      const double size = static_cast<double>(sizes[b]);
      if (params.alpha == 0.0 || uniform01(gen) * size < size - params.alpha) {
        state.join_block(b);
        break;
      }
    }
  }
#ifndef NDEBUG
  state.check_invariants();
#endif
}

/// Increasing list of sample sizes at which a trajectory is recorded.
class CheckpointSchedule {
 public:
  /// ceil(c rho^j) for j = 0, 1, ... up to n_target, plus n_target itself.
  static CheckpointSchedule geometric(std::int64_t n_target, double c = 1.0, double rho = 2.0) {
    if (n_target < 1) throw std::invalid_argument("CheckpointSchedule: n_target must be >= 1");
    if (!(c > 0.0) || !(rho > 1.0)) throw std::invalid_argument("CheckpointSchedule: need c > 0 and rho > 1");
    std::vector<std::int64_t> pts;
    for (double x = c; x < static_cast<double>(n_target); x *= rho) {
      const auto v = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x - 1e-9)));
      if (pts.empty() || v > pts.back()) pts.push_back(v);
    }
    if (pts.empty() || pts.back() != n_target) pts.push_back(n_target);
    return CheckpointSchedule(std::move(pts));
  }

  static CheckpointSchedule explicit_points(std::vector<std::int64_t> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.empty() || pts.front() < 1) throw std::invalid_argument("CheckpointSchedule: points must be >= 1");
    return CheckpointSchedule(std::move(pts));
  }

  std::span<const std::int64_t> points() const { return points_; }
  std::int64_t last() const { return points_.back(); }

 private:
  explicit CheckpointSchedule(std::vector<std::int64_t> pts) : points_(std::move(pts)) {}
  std::vector<std::int64_t> points_;
};

/// Runs the construction up to schedule.last(), calling on_checkpoint(state)
/// at every scheduled n. Invariants are verified at each checkpoint.
template <class Gen, class Visitor>
void simulate(const ModelParams& params, const CheckpointSchedule& schedule, Gen& gen, Visitor&& on_checkpoint,
              StorageMode mode = StorageMode::kElements) {
  PartitionState state = init(params, mode);
  for (const std::int64_t target : schedule.points()) {
    while (state.n() < target) step(state, params, gen);
    state.check_invariants();
    on_checkpoint(static_cast<const PartitionState&>(state));
  }
}

struct Checkpoint {
  std::int64_t n = 0;
  std::int64_t k_total = 0;
  std::vector<std::int64_t> counts;  // K_{1,n} .. K_{d,n}
};

struct TrajectoryRecord {
  int depth = 0;
  std::vector<Checkpoint> checkpoints;
};

/// Deterministic in (params, schedule, depth, seed).
inline TrajectoryRecord run(const ModelParams& params, const CheckpointSchedule& schedule, int depth,
                            std::uint64_t seed, StorageMode mode = StorageMode::kElements) {
  if (depth < 1) throw std::invalid_argument("run: depth must be >= 1");
  Rng gen(seed);
  TrajectoryRecord rec;
  rec.depth = depth;
  simulate(
      params, schedule, gen,
      [&](const PartitionState& s) {
        Checkpoint cp{s.n(), s.k_total(), std::vector<std::int64_t>(depth)};
        for (int r = 1; r <= depth; ++r) cp.counts[r - 1] = s.count(r);
        rec.checkpoints.push_back(std::move(cp));
      },
      mode);
  return rec;
}

inline TrajectoryRecord run(const ModelParams& params, std::int64_t n_target, int depth, std::uint64_t seed) {
  return run(params, CheckpointSchedule::geometric(n_target), depth, seed);
}

}  // namespace ewpitman
