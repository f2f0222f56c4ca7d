#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"

namespace metricdim {

/// Closed dyadic interval [index 2^-level, (index + 1) 2^-level].
struct DyadicInterval {
  int level = 0;
  Index index = 0;
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

struct UniformPartition {
  std::vector<DyadicInterval> parts;  ///< left to right, tiling [0, 1]
  bool minimal = true;                ///< false when found by the merge fallback
};

struct PartitionSearchParams {
  int j_max = 4;
  /// Runs of at least this many cells count as fiber interior; only their end
  /// cells are residue. Shorter runs are residue in full. Absent = 2^(k - j_max).
  std::optional<Index> run_threshold;
  std::uint64_t candidate_budget = 2'000'000;
};

/// Residue cells of a 1-dimensional fiber: the cover minus its interior runs.
inline std::vector<Index> fiber_residue(const DyadicCover& fiber, Index run_threshold) {
  std::vector<Index> cells;
  for (std::size_t i = 0; i < fiber.size(); ++i) cells.push_back(fiber[i][0]);
  std::vector<Index> residue;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= cells.size(); ++i) {
    if (i < cells.size() && cells[i] == cells[i - 1] + 1) continue;
    const auto length = static_cast<Index>(i - start);
    if (length >= run_threshold) {
      residue.push_back(cells[start]);
      if (length > 1) residue.push_back(cells[i - 1]);
    } else {
      residue.insert(residue.end(), cells.begin() + static_cast<std::ptrdiff_t>(start),
                     cells.begin() + static_cast<std::ptrdiff_t>(i));
    }
    start = i;
  }
  return residue;
}

namespace detail {

/// Intervals of level <= j_max as (level, index), numbered level by level.
inline std::size_t interval_id(int level, Index index) { return static_cast<std::size_t>((Index{1} << level) - 1 + index); }

class PartitionSearch {
 public:
  PartitionSearch(const FiberFamily& family, const PartitionSearchParams& params) : j_max_(params.j_max) {
    const int k = family.level;
    const Index threshold = params.run_threshold.value_or(Index{1} << (k - j_max_));
    const std::size_t members = family.fibers.size();
    words_ = (members + 63) / 64;
    good_.assign(interval_id(j_max_ + 1, 0), std::vector<std::uint64_t>(words_, 0));
    std::size_t m = 0;
    for (const auto& [base, fiber] : family.fibers) {
      const auto residue = fiber_residue(fiber, threshold);
      for (int level = 0; level <= j_max_; ++level) {
        const int shift = k - level;
        for (Index i = 0; i < (Index{1} << level); ++i) {
          // Residue cell w touches [a, b] (cell units) iff a - 1 <= w <= b.
          const Index a = i << shift;
          const Index b = (i + 1) << shift;
          auto it = std::lower_bound(residue.begin(), residue.end(), a - 1);
          if (it == residue.end() || *it > b) good_[interval_id(level, i)][m / 64] |= std::uint64_t{1} << (m % 64);
        }
      }
      ++m;
    }
    full_.assign(words_, ~std::uint64_t{0});
    if (members % 64) full_.back() = (std::uint64_t{1} << (members % 64)) - 1;
    if (members == 0) full_.clear();
    budget_ = params.candidate_budget;
  }

  bool covers(const std::vector<DyadicInterval>& parts) const {
    std::vector<std::uint64_t> acc(words_, 0);
    for (const auto& p : parts) {
      const auto& g = good_[interval_id(p.level, p.index)];
      for (std::size_t w = 0; w < words_; ++w) acc[w] |= g[w];
    }
    return acc == full_;
  }

  /// First partition with exactly count parts that works, in the order
  /// "coarser part first, left to right".
  std::optional<std::vector<DyadicInterval>> with_parts(std::size_t count) {
    std::vector<DyadicInterval> parts;
    if (extend(0, count, parts)) return parts;
    return std::nullopt;
  }

  std::vector<DyadicInterval> finest() const {
    std::vector<DyadicInterval> parts;
    for (Index i = 0; i < (Index{1} << j_max_); ++i) parts.push_back({j_max_, i});
    return parts;
  }

  /// Merges sibling pairs bottom-up while the partition keeps working.
  std::vector<DyadicInterval> merge_down(std::vector<DyadicInterval> parts) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        const auto& a = parts[i];
        const auto& b = parts[i + 1];
        if (a.level == b.level && a.level > 0 && a.index % 2 == 0 && b.index == a.index + 1) {
          auto trial = parts;
          trial[i] = {a.level - 1, a.index / 2};
          trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i) + 1);
          if (covers(trial)) {
            parts = std::move(trial);
            changed = true;
            break;
          }
        }
      }
    }
    return parts;
  }

  bool exhausted() const { return spent_ > budget_; }

 private:
  /// Fills [position, 2^j_max) (in finest-cell units) with exactly left parts.
  bool extend(Index position, std::size_t left, std::vector<DyadicInterval>& parts) {
    const Index end = Index{1} << j_max_;
    if (position == end) {
      if (left != 0) return false;
      if (++spent_ > budget_) return false;
      return covers(parts);
    }
    if (left == 0 || static_cast<Index>(left) > end - position) return false;
    for (int level = 0; level <= j_max_; ++level) {
      const Index width = Index{1} << (j_max_ - level);
      if (position % width != 0 || position + width > end) continue;
      parts.push_back({level, position / width});
      const bool ok = extend(position + width, left - 1, parts);
      if (ok) return true;
      parts.pop_back();
      if (exhausted()) return false;
    }
    return false;
  }

  int j_max_;
  std::size_t words_ = 0;
  std::vector<std::vector<std::uint64_t>> good_;
  std::vector<std::uint64_t> full_;
  std::uint64_t budget_ = 0;
  std::uint64_t spent_ = 0;
};

}  // namespace detail

/// Dyadic partition of I into intervals of level <= j_max such that every
/// member fiber has a part whose closure misses the closures of its residue
/// cells. Candidates are tried by increasing part count; a working
/// partition exists iff the finest one works, since refining keeps a good
/// part good. If the candidate budget runs out, the finest partition is
/// merged down instead and the result is flagged as not minimal.
inline std::optional<UniformPartition> uniform_partition_search(const FiberFamily& family,
                                                                const PartitionSearchParams& params = {}) {
  if (family.fiber_dim != 1) throw ArgumentError("partition search takes a family of 1-dimensional fibers");
  if (params.j_max < 0 || params.j_max > family.level || params.j_max > 20) {
    throw ArgumentError("j_max must lie in [0, min(k, 20)]");
  }
  detail::PartitionSearch search(family, params);
  const auto finest = search.finest();
  if (!search.covers(finest)) return std::nullopt;
  for (std::size_t count = 1; count <= finest.size(); ++count) {
    if (auto parts = search.with_parts(count)) return UniformPartition{std::move(*parts), true};
    if (search.exhausted()) break;
  }
  return UniformPartition{search.merge_down(finest), false};
}

}  // namespace metricdim
