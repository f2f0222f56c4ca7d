#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's counting code; exact cases use integer arithmetic.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace oracle {

/// Numerators m of the depth-d middle-thirds endpoints m / 3^d, sorted.
inline std::vector<std::int64_t> cantor_numerators(int depth) {
  std::vector<std::int64_t> lefts{0};
  std::int64_t width = 1;
  for (int i = 0; i < depth; ++i) width *= 3;
  std::int64_t scale = width;
  for (int i = 0; i < depth; ++i) {
    scale /= 3;
    std::vector<std::int64_t> next;
    for (auto l : lefts) {
      next.push_back(l);
      next.push_back(l + 2 * scale);
    }
    lefts = std::move(next);
  }
  std::vector<std::int64_t> out;
  for (auto l : lefts) {
    out.push_back(l);
    out.push_back(l + scale);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::int64_t pow3(int d) {
  std::int64_t p = 1;
  for (int i = 0; i < d; ++i) p *= 3;
  return p;
}

/// N_k of the depth-d endpoints with half-open cells and 1 clamped into the
/// last cell: distinct values of min(floor(2^k m / 3^d), 2^k - 1).
inline std::uint64_t cantor_box_count(int depth, int k) {
  const auto den = static_cast<__int128>(pow3(depth));
  const __int128 top = (static_cast<__int128>(1) << k) - 1;
  std::set<__int128> cells;
  for (auto m : cantor_numerators(depth)) {
    const __int128 cell = ((static_cast<__int128>(m) << k) / den);
    cells.insert(std::min(cell, top));
  }
  return cells.size();
}

/// Largest subset of sorted 1-d values with consecutive gaps >= r, by trying
/// every subset (small inputs only).
inline std::uint64_t brute_force_net(const std::vector<double>& values, double r) {
  const std::size_t n = values.size();
  std::uint64_t best = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    bool ok = true;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      ++count;
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((mask >> j & 1) && std::abs(values[i] - values[j]) < r * (1 - 1e-12)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) best = std::max(best, count);
  }
  return best;
}

/// Whether a lattice point set (pairs) splits into s classes, class i having
/// every fiber along drop[i] of size <= delta, for some choice of drops.
/// Enumerates all class assignments and drop vectors.
inline bool sparse_partition_exists(const std::vector<std::pair<long, long>>& pts, int s, int delta) {
  const std::size_t m = pts.size();
  std::vector<int> assignment(m, 0);
  const int drop_choices = 1 << s;
  std::function<bool(std::size_t)> rec;
  // Build class contents once per full assignment, then test every drop vector.
  auto feasible = [&]() {
    for (int drops = 0; drops < drop_choices; ++drops) {
      bool ok = true;
      for (int c = 0; c < s && ok; ++c) {
        const int drop = drops >> c & 1;
        std::vector<long> keys;
        for (std::size_t i = 0; i < m; ++i) {
          if (assignment[i] != c) continue;
          keys.push_back(drop == 0 ? pts[i].second : pts[i].first);
        }
        std::sort(keys.begin(), keys.end());
        for (std::size_t i = 0; i < keys.size() && ok; ++i) {
          const auto same = std::upper_bound(keys.begin(), keys.end(), keys[i]) -
                            std::lower_bound(keys.begin(), keys.end(), keys[i]);
          if (same > delta) ok = false;
        }
      }
      if (ok) return true;
    }
    return false;
  };
  rec = [&](std::size_t i) {
    if (i == m) return feasible();
    // Symmetry: the first point goes to class 0.
    const int limit = i == 0 ? 1 : s;
    for (int c = 0; c < limit; ++c) {
      assignment[i] = c;
      if (rec(i + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

/// Every cell [i/2^m, (i+1)/2^m) of [0, 1] holds some p/q with p, q
/// differences of integer numerators, q > 0; the last cell is closed.
inline bool integer_quotient_dense(const std::vector<std::int64_t>& nums, int m) {
  std::set<std::int64_t> diffs;
  for (auto a : nums) {
    for (auto b : nums) diffs.insert(a - b);
  }
  const std::int64_t cells = std::int64_t{1} << m;
  std::vector<char> hit(static_cast<std::size_t>(cells), 0);
  for (auto q : diffs) {
    if (q <= 0) continue;
    for (auto p : diffs) {
      if (p < 0 || p > q) continue;
      const std::int64_t cell = std::min((p << m) / q, cells - 1);
      hit[static_cast<std::size_t>(cell)] = 1;
    }
  }
  for (char h : hit) {
    if (!h) return false;
  }
  return true;
}

}  // namespace oracle
