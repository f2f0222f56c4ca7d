#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metricdim/errors.hpp"
#include "metricdim/point_set.hpp"

namespace metricdim {

enum class NetMode { exact, greedy };

struct PackingBudget {
  std::size_t max_points = 2500;       ///< exact mode limit for n >= 2
  std::uint64_t max_nodes = 20'000'000; ///< branch-and-bound node limit
};

namespace detail {

inline bool separated(double raw_distance, double raw_radius) {
  return raw_distance >= raw_radius * (1.0 - kDistanceTolerance);
}

/// Size of the left-to-right greedy packing of a sorted range; optimal in one dimension.
inline std::uint64_t sorted_greedy_count(std::span<const double> sorted, double raw_radius) {
  std::uint64_t count = 0;
  auto it = sorted.begin();
  const double step = raw_radius * (1.0 - kDistanceTolerance);
  while (it != sorted.end()) {
    ++count;
    it = std::lower_bound(it + 1, sorted.end(), *it + step);
  }
  return count;
}

struct CellKey {
  std::vector<std::int64_t> v;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : k.v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Greedy maximal r-separated subset of the given rows (row-major, dim n),
/// scanned in the given order. Returns the chosen row positions.
inline std::vector<std::size_t> greedy_separated(std::span<const double> rows, std::size_t n,
                                                 double raw_radius) {
  const std::size_t count = rows.size() / n;
  std::vector<std::size_t> chosen;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  auto row = [&](std::size_t i) { return rows.subspan(i * n, n); };
  std::size_t neighbours = 1;
  for (std::size_t c = 0; c < n; ++c) neighbours *= 3;
  CellKey key{std::vector<std::int64_t>(n)};
  CellKey probe{std::vector<std::int64_t>(n)};
  for (std::size_t i = 0; i < count; ++i) {
    auto p = row(i);
    for (std::size_t c = 0; c < n; ++c) key.v[c] = static_cast<std::int64_t>(std::floor(p[c] / raw_radius));
    bool ok = true;
    for (std::size_t code = 0; code < neighbours && ok; ++code) {
      std::size_t rest = code;
      for (std::size_t c = 0; c < n; ++c) {
        probe.v[c] = key.v[c] + static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      auto it = grid.find(probe);
      if (it == grid.end()) continue;
      for (std::size_t j : it->second) {
        if (!separated(sup_distance(p, row(j)), raw_radius)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      chosen.push_back(i);
      grid[key].push_back(i);
    }
  }
  return chosen;
}

/// Maximum r-separated subset size by branch and bound. The bound counts
/// distinct cells of side r among the candidates: two points in one half-open
/// cell are closer than r, so each cell contributes at most one point.
class ExactPacker {
 public:
  ExactPacker(std::span<const double> rows, std::size_t n, double raw_radius, std::uint64_t node_budget)
      : rows_(rows), n_(n), radius_(raw_radius), budget_(node_budget) {
    const std::size_t count = rows.size() / n;
    conflicts_.assign(count, {});
    cell_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        if (!separated(sup_distance(row(i), row(j)), radius_)) {
          conflicts_[i].push_back(j);
          conflicts_[j].push_back(i);
        }
      }
    }
    // Cells slightly narrower than r so that same-cell points always conflict.
    const double cell_side = radius_ * (1.0 - kDistanceTolerance);
    std::unordered_map<CellKey, std::size_t, CellKeyHash> ids;
    for (std::size_t i = 0; i < count; ++i) {
      CellKey key{std::vector<std::int64_t>(n)};
      for (std::size_t c = 0; c < n; ++c) {
        key.v[c] = static_cast<std::int64_t>(std::floor(row(i)[c] / cell_side));
      }
      cell_[i] = ids.emplace(std::move(key), ids.size()).first->second;
    }
    cell_count_ = ids.size();
  }

  std::uint64_t solve(std::uint64_t lower_bound) {
    best_ = lower_bound;
    std::vector<std::size_t> candidates(conflicts_.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    search(candidates, 0);
    return best_;
  }

 private:
  std::span<const double> row(std::size_t i) const { return rows_.subspan(i * n_, n_); }

  std::uint64_t cell_bound(const std::vector<std::size_t>& candidates) {
    seen_.assign(cell_count_, false);
    std::uint64_t distinct = 0;
    for (std::size_t c : candidates) {
      if (!seen_[cell_[c]]) {
        seen_[cell_[c]] = true;
        ++distinct;
      }
    }
    return distinct;
  }

  void search(const std::vector<std::size_t>& candidates, std::uint64_t taken) {
    if (++nodes_ > budget_) throw BudgetError("exact packing exceeded its node budget; use greedy mode");
    if (candidates.empty()) {
      best_ = std::max(best_, taken);
      return;
    }
    if (taken + cell_bound(candidates) <= best_) return;
    // Branch on the candidate with the most remaining conflicts.
    std::vector<char> alive(conflicts_.size(), 0);
    for (std::size_t c : candidates) alive[c] = 1;
    std::size_t pivot = candidates.front();
    std::size_t pivot_degree = 0;
    for (std::size_t c : candidates) {
      std::size_t deg = 0;
      for (std::size_t d : conflicts_[c]) deg += alive[d];
      if (deg > pivot_degree) {
        pivot_degree = deg;
        pivot = c;
      }
    }
    if (pivot_degree == 0) {
      best_ = std::max<std::uint64_t>(best_, taken + candidates.size());
      return;
    }
    std::vector<std::size_t> with;
    alive[pivot] = 0;
    for (std::size_t d : conflicts_[pivot]) alive[d] = 0;
    for (std::size_t c : candidates) {
      if (alive[c]) with.push_back(c);
    }
    search(with, taken + 1);
    std::vector<std::size_t> without;
    without.reserve(candidates.size() - 1);
    for (std::size_t c : candidates) {
      if (c != pivot) without.push_back(c);
    }
    search(without, taken);
  }

  std::span<const double> rows_;
  std::size_t n_;
  double radius_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::uint64_t best_ = 0;
  std::vector<std::vector<std::size_t>> conflicts_;
  std::vector<std::size_t> cell_;
  std::size_t cell_count_ = 0;
  std::vector<char> seen_;
};

/// net_r of an arbitrary row subset (row-major, lexicographically sorted).
inline std::uint64_t net_of_rows(std::span<const double> rows, std::size_t n, double raw_radius, NetMode mode,
                                 const PackingBudget& budget) {
  if (rows.empty()) return 0;
  if (n == 1) return sorted_greedy_count(rows, raw_radius);
  const auto greedy = static_cast<std::uint64_t>(greedy_separated(rows, n, raw_radius).size());
  if (mode == NetMode::greedy) return greedy;
  if (rows.size() / n > budget.max_points) {
    throw BudgetError("exact packing of " + std::to_string(rows.size() / n) + " points exceeds the budget of " +
                      std::to_string(budget.max_points) + "; use greedy mode");
  }
  ExactPacker packer(rows, n, raw_radius, budget.max_nodes);
  return packer.solve(greedy);
}

}  // namespace detail

/// net_r S: the largest number of points of S pairwise at distance >= r in the
/// set's metric. Greedy mode returns a maximal separated set instead, which
/// satisfies greedy(r) >= exact(2r).
inline std::uint64_t net_number(const PointSet& ps, double r, NetMode mode = NetMode::exact,
                                const PackingBudget& budget = {}) {
  if (ps.empty()) throw DomainError("net number of an empty point set");
  if (!(r > 0.0)) throw ArgumentError("packing radius must be positive");
  return detail::net_of_rows(ps.coords(), ps.dim(), ps.metric().raw_radius(r), mode, budget);
}

/// Smallest positive sup-norm distance between two points (raw, before any
/// snowflake exponent); +inf for a single point.
inline double min_separation(const PointSet& ps) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t count = ps.size();
  if (ps.dim() == 1) {
    for (std::size_t i = 1; i < count; ++i) best = std::min(best, ps[i][0] - ps[i - 1][0]);
    return best;
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto p = ps[i];
    for (std::size_t j = i + 1; j < count; ++j) {
      auto q = ps[j];
      if (q[0] - p[0] >= best) break;
      const double d = sup_distance(p, q);
      if (d > 0.0) best = std::min(best, d);
    }
  }
  return best;
}

}  // namespace metricdim
