#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"

namespace metricdim {

namespace detail {

/// Group id of every point under "same coordinates except drop".
/// Ids are assigned in order of first appearance in the sorted cover.
struct FiberIndex {
  std::vector<std::size_t> group;
  std::vector<std::uint64_t> sizes;
};

inline FiberIndex fiber_index(const DyadicCover& cover, std::span<const std::size_t> members, std::size_t drop) {
  FiberIndex out;
  out.group.resize(members.size());
  std::map<std::vector<Index>, std::size_t> ids;
  std::vector<Index> key;
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto v = cover[members[i]];
    key.clear();
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (c != drop) key.push_back(v[c]);
    }
    auto [it, fresh] = ids.emplace(key, ids.size());
    if (fresh) out.sizes.push_back(0);
    out.group[i] = it->second;
    ++out.sizes[it->second];
  }
  return out;
}

inline std::vector<std::size_t> all_members(const DyadicCover& cover) {
  std::vector<std::size_t> m(cover.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = i;
  return m;
}

inline std::string format_index(std::span<const Index> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out + ")";
}

}  // namespace detail

/// Largest number of points sharing all coordinates other than drop.
inline std::uint64_t max_fiber(const DyadicCover& cover, std::size_t drop) {
  if (drop >= cover.dim()) throw ArgumentError("drop coordinate out of range");
  const auto members = detail::all_members(cover);
  const auto idx = detail::fiber_index(cover, members, drop);
  return idx.sizes.empty() ? 0 : *std::max_element(idx.sizes.begin(), idx.sizes.end());
}

/// Least drop coordinate (0-based) whose fibers all have at most delta points.
inline std::optional<std::size_t> is_delta_sparse(const DyadicCover& cover, double delta) {
  for (std::size_t c = 0; c < cover.dim(); ++c) {
    if (static_cast<double>(max_fiber(cover, c)) <= delta) return c;
  }
  return std::nullopt;
}

/// card C <= delta * card(pi C), where pi drops the witness coordinate.
/// Throws ContractViolation when the witness is not valid.
inline bool card_bound_check(const DyadicCover& cover, std::size_t drop, double delta) {
  const auto worst = max_fiber(cover, drop);
  if (static_cast<double>(worst) > delta) {
    throw ContractViolation("drop coordinate " + std::to_string(drop) + " is not a witness: a fiber has " +
                            std::to_string(worst) + " points, more than delta = " + std::to_string(delta));
  }
  const auto members = detail::all_members(cover);
  const auto projected = detail::fiber_index(cover, members, drop).sizes.size();
  return static_cast<double>(cover.size()) <= delta * static_cast<double>(projected);
}

struct SparseCertificate {
  int level = 0;
  std::size_t dim = 0;
  std::vector<DyadicCover> classes;
  std::vector<std::size_t> projections;  ///< drop coordinate per class
  std::vector<std::uint64_t> delta;      ///< achieved max fiber per class

  [[nodiscard]] std::size_t s() const { return classes.size(); }
};

/// Problems found by recounting from scratch; empty means valid.
inline std::vector<std::string> validate_certificate(const DyadicCover& cover, const SparseCertificate& cert) {
  std::vector<std::string> problems;
  if (cert.projections.size() != cert.s() || cert.delta.size() != cert.s()) {
    problems.push_back("certificate lists " + std::to_string(cert.s()) + " classes but " +
                       std::to_string(cert.projections.size()) + " projections and " +
                       std::to_string(cert.delta.size()) + " deltas");
    return problems;
  }
  std::vector<int> owner(cover.size(), -1);
  for (std::size_t i = 0; i < cert.s(); ++i) {
    const auto& cls = cert.classes[i];
    if (cls.empty()) continue;
    if (cls.dim() != cover.dim() || cls.level() != cover.level()) {
      problems.push_back("class " + std::to_string(i) + " has the wrong level or dimension");
      continue;
    }
    for (std::size_t p = 0; p < cls.size(); ++p) {
      auto pos = cover.find(cls[p]);
      if (!pos) {
        problems.push_back("class " + std::to_string(i) + " holds " + detail::format_index(cls[p]) +
                           ", which is not in the cover");
      } else if (owner[*pos] >= 0) {
        problems.push_back("point " + detail::format_index(cls[p]) + " is in classes " + std::to_string(owner[*pos]) +
                           " and " + std::to_string(i));
      } else {
        owner[*pos] = static_cast<int>(i);
      }
    }
    if (cert.projections[i] >= cover.dim()) {
      problems.push_back("class " + std::to_string(i) + " drops coordinate " + std::to_string(cert.projections[i]) +
                         ", out of range");
      continue;
    }
    const auto members = detail::all_members(cls);
    const auto idx = detail::fiber_index(cls, members, cert.projections[i]);
    for (std::size_t p = 0; p < members.size(); ++p) {
      if (idx.sizes[idx.group[p]] > cert.delta[i]) {
        problems.push_back("class " + std::to_string(i) + ": fiber through " + detail::format_index(cls[p]) +
                           " has " + std::to_string(idx.sizes[idx.group[p]]) + " points, above delta " +
                           std::to_string(cert.delta[i]));
        break;
      }
    }
  }
  for (std::size_t p = 0; p < cover.size(); ++p) {
    if (owner[p] < 0) problems.push_back("point " + detail::format_index(cover[p]) + " is in no class");
  }
  return problems;
}

enum class SearchMode { exact, greedy };

inline constexpr std::uint64_t kSparseNodeBudget = 10'000'000;

namespace detail {

inline SparseCertificate build_certificate(const DyadicCover& cover, const std::vector<std::vector<std::size_t>>& chunks,
                                           const std::vector<std::size_t>& drops) {
  SparseCertificate cert{cover.level(), cover.dim(), {}, drops, {}};
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    std::vector<Index> flat;
    for (auto p : chunks[i]) flat.insert(flat.end(), cover[p].begin(), cover[p].end());
    cert.classes.emplace_back(cover.level(), cover.dim(), std::move(flat));
    cert.delta.push_back(cert.classes.back().empty() ? 0 : max_fiber(cert.classes.back(), drops[i]));
  }
  return cert;
}

/// Splits each coordinate's share into t_c classes by cutting every fiber
/// into consecutive chunks of at most cap points.
inline SparseCertificate certificate_from_assignment(const DyadicCover& cover, const std::vector<std::size_t>& coord_of,
                                                     const std::vector<std::size_t>& t, std::uint64_t cap) {
  std::vector<std::vector<std::size_t>> chunks;
  std::vector<std::size_t> drops;
  for (std::size_t c = 0; c < t.size(); ++c) {
    if (t[c] == 0) continue;
    std::vector<std::size_t> share;
    for (std::size_t p = 0; p < coord_of.size(); ++p) {
      if (coord_of[p] == c) share.push_back(p);
    }
    const auto idx = fiber_index(cover, share, c);
    std::vector<std::uint64_t> seen(idx.sizes.size(), 0);
    const std::size_t base = chunks.size();
    for (std::size_t q = 0; q < t[c]; ++q) {
      chunks.emplace_back();
      drops.push_back(c);
    }
    for (std::size_t i = 0; i < share.size(); ++i) {
      const auto slot = seen[idx.group[i]]++ / cap;
      chunks[base + slot].push_back(share[i]);
    }
  }
  return build_certificate(cover, chunks, drops);
}

class ExactSparseSearch {
 public:
  ExactSparseSearch(const DyadicCover& cover, std::uint64_t cap, std::uint64_t budget)
      : cover_(cover), cap_(cap), budget_(budget) {
    const auto members = all_members(cover);
    for (std::size_t c = 0; c < cover.dim(); ++c) index_.push_back(fiber_index(cover, members, c));
  }

  std::optional<SparseCertificate> solve(std::size_t s) {
    const std::size_t n = cover_.dim();
    std::vector<std::size_t> t(n, 0);
    // Compositions of s into n parts, lexicographically from (s, 0, ..., 0) down.
    std::optional<SparseCertificate> found;
    auto visit = [&](auto&& self, std::size_t c, std::size_t left) -> bool {
      if (c + 1 == n) {
        t[c] = left;
        if (assign(t)) {
          found = certificate_from_assignment(cover_, coord_of_, t, cap_);
          return true;
        }
        return false;
      }
      for (std::size_t take = left + 1; take-- > 0;) {
        t[c] = take;
        if (self(self, c + 1, left - take)) return true;
      }
      return false;
    };
    visit(visit, 0, s);
    return found;
  }

 private:
  bool assign(const std::vector<std::size_t>& t) {
    const std::size_t n = cover_.dim();
    load_.assign(n, {});
    for (std::size_t c = 0; c < n; ++c) load_[c].assign(index_[c].sizes.size(), 0);
    coord_of_.assign(cover_.size(), 0);
    return place(0, t);
  }

  bool place(std::size_t p, const std::vector<std::size_t>& t) {
    if (++nodes_ > budget_) throw BudgetError("exact sparse decomposition exceeded its node budget");
    if (p == cover_.size()) return true;
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (t[c] == 0) continue;
      auto& load = load_[c][index_[c].group[p]];
      if (load >= t[c] * cap_) continue;
      ++load;
      coord_of_[p] = c;
      if (place(p + 1, t)) return true;
      --load;
    }
    return false;
  }

  const DyadicCover& cover_;
  std::uint64_t cap_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<FiberIndex> index_;
  std::vector<std::vector<std::uint64_t>> load_;
  std::vector<std::size_t> coord_of_;
};

/// One peeling round: takes up to cap points from every fiber along drop,
/// always taking next the point whose fibers along the pressure coordinates
/// most exceed what later rounds can absorb (absorb[c] points per fiber),
/// then whose fibers are largest.
inline std::vector<char> peel(const DyadicCover& cover, const std::vector<std::size_t>& remaining, std::size_t drop,
                              const std::vector<std::uint64_t>& absorb, const std::vector<char>& pressure_coords,
                              std::uint64_t cap) {
  const std::size_t n = cover.dim();
  std::vector<FiberIndex> idx;
  for (std::size_t c = 0; c < n; ++c) idx.push_back(fiber_index(cover, remaining, c));
  std::vector<std::vector<std::uint64_t>> left(n);
  for (std::size_t c = 0; c < n; ++c) left[c] = idx[c].sizes;
  auto pressure = [&](std::size_t i) {
    std::uint64_t excess = 0;
    std::uint64_t size = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!pressure_coords[c]) continue;
      const auto l = left[c][idx[c].group[i]];
      size += l;
      if (l > absorb[c]) excess += l - absorb[c];
    }
    return (excess << 32) | std::min<std::uint64_t>(size, 0xffffffffu);
  };
  // Max-heap on (pressure, earlier position first); stale entries are re-pushed.
  std::vector<std::pair<std::uint64_t, std::size_t>> heap;
  for (std::size_t i = 0; i < remaining.size(); ++i) heap.emplace_back(pressure(i), remaining.size() - i);
  std::make_heap(heap.begin(), heap.end());
  std::vector<std::uint64_t> taken(idx[drop].sizes.size(), 0);
  std::vector<char> chosen(remaining.size(), 0);
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end());
    const auto [p, tag] = heap.back();
    heap.pop_back();
    const std::size_t i = remaining.size() - tag;
    if (taken[idx[drop].group[i]] >= cap) continue;
    if (const auto now = pressure(i); now != p) {
      heap.emplace_back(now, tag);
      std::push_heap(heap.begin(), heap.end());
      continue;
    }
    ++taken[idx[drop].group[i]];
    chosen[i] = 1;
    for (std::size_t c = 0; c < n; ++c) --left[c][idx[c].group[i]];
  }
  return chosen;
}

inline std::uint64_t coverage(const DyadicCover& cover, const std::vector<std::size_t>& remaining, std::size_t drop,
                              std::uint64_t cap) {
  std::uint64_t score = 0;
  for (auto size : fiber_index(cover, remaining, drop).sizes) score += std::min(size, cap);
  return score;
}

/// Splits remaining points between a class dropping a and one dropping b
/// (a != b), at most cap per fiber in each, or reports that no split exists.
/// Each point is an edge between its a-fiber and its b-fiber; this orients
/// the edges under node capacity cap, placing points one at a time and
/// rerouting along BFS augmenting paths when both ends are full.
inline std::optional<std::vector<char>> orient_pair(const DyadicCover& cover, const std::vector<std::size_t>& remaining,
                                                    std::size_t a, std::size_t b, std::uint64_t cap) {
  const auto ia = fiber_index(cover, remaining, a);
  const auto ib = fiber_index(cover, remaining, b);
  const std::size_t fa = ia.sizes.size();
  const std::size_t nodes = fa + ib.sizes.size();
  const std::size_t m = remaining.size();
  auto end_of = [&](std::size_t i, char side) { return side == 0 ? ia.group[i] : fa + ib.group[i]; };
  std::vector<std::uint64_t> load(nodes, 0);
  std::vector<std::vector<std::size_t>> held(nodes);  // points assigned to each node, possibly stale
  std::vector<char> side(m, -1);
  auto assign = [&](std::size_t i, char s) {
    side[i] = s;
    const auto u = end_of(i, s);
    ++load[u];
    held[u].push_back(i);
  };
  std::vector<std::size_t> parent_point(nodes);
  std::vector<std::size_t> parent_node(nodes);
  std::vector<char> seen(nodes);
  constexpr auto kNone = static_cast<std::size_t>(-1);
  for (std::size_t p = 0; p < m; ++p) {
    const auto u0 = end_of(p, 0);
    const auto u1 = end_of(p, 1);
    if (load[u0] < cap || load[u1] < cap) {
      assign(p, load[u0] <= load[u1] ? 0 : 1);
      continue;
    }
    // BFS over full nodes: from node u, a point q held at u may move to its
    // other end v. Stop at the first node with spare capacity.
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<std::size_t> queue{u0, u1};
    seen[u0] = seen[u1] = 1;
    parent_point[u0] = parent_point[u1] = kNone;
    std::size_t target = kNone;
    for (std::size_t head = 0; head < queue.size() && target == kNone; ++head) {
      const auto u = queue[head];
      for (const auto q : held[u]) {
        if (end_of(q, side[q]) != u) continue;
        const auto v = end_of(q, static_cast<char>(1 - side[q]));
        if (seen[v]) continue;
        seen[v] = 1;
        parent_point[v] = q;
        parent_node[v] = u;
        if (load[v] < cap) {
          target = v;
          break;
        }
        queue.push_back(v);
      }
    }
    if (target == kNone) return std::nullopt;
    // Shift each point on the path one step toward target, freeing a start node.
    auto v = target;
    while (parent_point[v] != kNone) {
      const auto q = parent_point[v];
      const auto u = parent_node[v];
      --load[u];
      assign(q, static_cast<char>(1 - side[q]));
      v = u;
    }
    assign(p, v == u0 ? 0 : 1);
  }
  // side 0 drops a and is the earlier round.
  std::vector<char> first(m);
  for (std::size_t i = 0; i < m; ++i) first[i] = side[i] == 0;
  return first;
}

/// Peels s rounds. With a fixed order, round i drops order[i] and pressure
/// comes from the coordinates of later rounds; without one, every round
/// drops the coordinate of largest coverage and pressure comes from all
/// other coordinates.
inline std::optional<SparseCertificate> greedy_pass(const DyadicCover& cover, std::size_t s, std::uint64_t cap,
                                                    const std::vector<std::size_t>* order) {
  const std::size_t n = cover.dim();
  std::vector<std::size_t> remaining = all_members(cover);
  std::vector<std::vector<std::size_t>> chunks;
  std::vector<std::size_t> drops;
  // With a fixed order whose last two coordinates differ, those rounds are
  // split exactly by orient_pair.
  const bool exact_tail = order && s >= 2 && (*order)[s - 2] != (*order)[s - 1];
  const std::size_t greedy_rounds = exact_tail ? s - 2 : s;
  for (std::size_t round = 0; round < greedy_rounds && !remaining.empty(); ++round) {
    std::size_t drop = 0;
    std::vector<char> pressure_coords(n, 0);
    std::vector<std::uint64_t> absorb(n, 0);
    if (order) {
      drop = (*order)[round];
      for (std::size_t later = round + 1; later < s; ++later) {
        pressure_coords[(*order)[later]] = 1;
        absorb[(*order)[later]] += cap;
      }
      pressure_coords[drop] = 0;
    } else {
      std::uint64_t best = 0;
      for (std::size_t c = 0; c < n; ++c) {
        if (const auto score = coverage(cover, remaining, c, cap); score > best) {
          best = score;
          drop = c;
        }
      }
      for (std::size_t c = 0; c < n; ++c) pressure_coords[c] = c != drop;
    }
    const auto chosen = peel(cover, remaining, drop, absorb, pressure_coords, cap);
    std::vector<std::size_t> cls;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < remaining.size(); ++i) (chosen[i] ? cls : rest).push_back(remaining[i]);
    chunks.push_back(std::move(cls));
    drops.push_back(drop);
    remaining = std::move(rest);
  }
  if (exact_tail && !remaining.empty()) {
    const auto a = (*order)[s - 2];
    const auto b = (*order)[s - 1];
    const auto first = orient_pair(cover, remaining, a, b, cap);
    if (!first) return std::nullopt;
    std::vector<std::size_t> ca;
    std::vector<std::size_t> cb;
    for (std::size_t i = 0; i < remaining.size(); ++i) ((*first)[i] ? ca : cb).push_back(remaining[i]);
    chunks.resize(s - 2);
    drops.resize(s - 2, 0);
    chunks.push_back(std::move(ca));
    chunks.push_back(std::move(cb));
    drops.push_back(a);
    drops.push_back(b);
    remaining.clear();
  }
  if (!remaining.empty()) return std::nullopt;
  chunks.resize(s);
  drops.resize(s, 0);
  return build_certificate(cover, chunks, drops);
}

/// Orders are tried only while n^s stays below this.
inline constexpr std::size_t kGreedyOrderLimit = 256;

/// Max-coverage peeling, then (for small n^s) one pass per fixed order of
/// drop coordinates, in lexicographic order of the orders. Fixed-order
/// passes finish their last two rounds exactly, so for s = 2 and n <= 16 the verdict is
/// exact; beyond that a miss is possible.
inline std::optional<SparseCertificate> greedy_decompose(const DyadicCover& cover, std::size_t s, std::uint64_t cap) {
  if (auto cert = greedy_pass(cover, s, cap, nullptr)) return cert;
  const std::size_t n = cover.dim();
  std::size_t orders = 1;
  for (std::size_t i = 0; i < s && orders <= kGreedyOrderLimit; ++i) orders *= n;
  if (orders > kGreedyOrderLimit) return std::nullopt;
  std::vector<std::size_t> order(s, 0);
  for (std::size_t code = 0; code < orders; ++code) {
    std::size_t rest = code;
    for (std::size_t i = s; i-- > 0;) {
      order[i] = rest % n;
      rest /= n;
    }
    if (auto cert = greedy_pass(cover, s, cap, &order)) return cert;
  }
  return std::nullopt;
}

}  // namespace detail

/// Partition of the cover into s classes, each delta-sparse. Exact mode
/// returns nothing only when no partition exists; greedy absence is
/// inconclusive. Every returned certificate has been re-validated.
inline std::optional<SparseCertificate> sparse_decompose(const DyadicCover& cover, std::size_t s, double delta,
                                                         SearchMode mode,
                                                         std::uint64_t node_budget = kSparseNodeBudget) {
  if (s == 0) throw ArgumentError("number of classes must be at least 1");
  if (!(delta >= 0.0)) throw ArgumentError("delta must be nonnegative");
  const auto cap = static_cast<std::uint64_t>(std::floor(delta));
  std::optional<SparseCertificate> cert;
  if (cover.empty()) {
    cert = detail::build_certificate(cover, std::vector<std::vector<std::size_t>>(s), std::vector<std::size_t>(s, 0));
  } else if (cap == 0) {
    return std::nullopt;
  } else if (mode == SearchMode::exact) {
    cert = detail::ExactSparseSearch(cover, cap, node_budget).solve(s);
  } else {
    cert = detail::greedy_decompose(cover, s, cap);
  }
  if (cert) {
    if (auto problems = validate_certificate(cover, *cert); !problems.empty()) {
      throw ContractViolation("internal certificate failed validation: " + problems.front());
    }
  }
  return cert;
}

/// Certificate for the union of two disjoint covers, with s1 + s2 classes.
inline SparseCertificate merge_certificates(const SparseCertificate& a, const SparseCertificate& b) {
  if (a.level != b.level || a.dim != b.dim) throw ArgumentError("certificates at different levels or dimensions");
  SparseCertificate out = a;
  out.classes.insert(out.classes.end(), b.classes.begin(), b.classes.end());
  out.projections.insert(out.projections.end(), b.projections.begin(), b.projections.end());
  out.delta.insert(out.delta.end(), b.delta.begin(), b.delta.end());
  return out;
}

struct ProfileEntry {
  int level = 0;
  std::size_t s = 0;
  std::uint64_t delta = 0;
  double eps = 0.0;  ///< log2(delta) / k
};

struct SparsenessProfile {
  std::vector<ProfileEntry> entries;
};

/// Least integer delta at which greedy decomposition into s classes succeeds,
/// found by binary search between 1 and the best single-class witness.
inline std::uint64_t least_greedy_delta(const DyadicCover& cover, std::size_t s) {
  if (cover.empty()) return 1;
  std::uint64_t hi = max_fiber(cover, 0);
  for (std::size_t c = 1; c < cover.dim(); ++c) hi = std::min(hi, max_fiber(cover, c));
  std::uint64_t lo = 1;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (sparse_decompose(cover, s, static_cast<double>(mid), SearchMode::greedy)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

inline SparsenessProfile sparseness_profile(std::span<const DyadicCover> covers, std::size_t s) {
  if (covers.size() < 2) throw ArgumentError("sparseness profile needs at least 2 levels");
  SparsenessProfile out;
  for (const auto& cover : covers) {
    const auto delta = least_greedy_delta(cover, s);
    const double eps = cover.level() == 0 ? 0.0 : std::log2(static_cast<double>(delta)) / cover.level();
    out.entries.push_back({cover.level(), s, delta, eps});
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ProfileEntry& a, const ProfileEntry& b) { return a.level < b.level; });
  return out;
}

// ---------------------------------------------------------------------------
// Four-class split of a nowhere-dense planar cover

struct PlanarClass {
  DyadicCover cells;
  std::size_t drop = 0;       ///< coordinate whose fibers bound the class
  std::uint64_t delta = 0;    ///< max fiber along that drop
  double eps = 0.0;           ///< log2(delta) / k, 0 for empty classes
  [[nodiscard]] bool sparse_witnessed() const { return cells.empty() || is_delta_sparse(cells, static_cast<double>(delta)).has_value(); }
};

struct PlanarClassification {
  int level = 0;
  Index run_threshold = 0;
  std::array<PlanarClass, 4> classes;
};

/// Splits a planar cover into
///   C1: cells in columns u whose fiber holds a run of >= run_threshold cells,
///   C2: cells in rows with such a run, minus C1,
///   C3: remaining cells (u, v) where g_v jumps by more than one cell between u
///       and an adjacent column, or where (u, v - 1) is also covered,
///   C4: the rest,
/// with g_v(u) the least w >= v such that (u, w) is covered (2^k + 1 if none).
/// C1 and C3 are bounded by row fibers (drop 0), C2 and C4 by column fibers
/// (drop 1). Covers with a full level-j box are rejected.
inline PlanarClassification classify_planar_cover(const DyadicCover& cover, int j,
                                                  std::optional<Index> run_threshold = std::nullopt) {
  if (cover.dim() != 2) throw ArgumentError("planar classifier takes a 2-dimensional cover");
  if (j < 0 || j > cover.level()) throw ArgumentError("window level j must lie in [0, k]");
  if (cover.empty()) throw ArgumentError("planar classifier needs a nonempty cover");
  if (has_full_box(cover, j, 1.0)) {
    throw DomainError("cover has a full level-" + std::to_string(j) + " box; the classifier needs a nowhere dense cover");
  }
  const int k = cover.level();
  const Index threshold = run_threshold.value_or(Index{1} << (k - j));
  if (threshold < 1) throw ArgumentError("run threshold must be at least 1");
  const Index sentinel = (Index{1} << k) + 1;

  std::map<Index, std::vector<Index>> columns;  // u -> sorted v
  std::map<Index, std::vector<Index>> rows;     // v -> sorted u
  for (std::size_t i = 0; i < cover.size(); ++i) {
    columns[cover[i][0]].push_back(cover[i][1]);
    rows[cover[i][1]].push_back(cover[i][0]);
  }
  for (auto& [v, us] : rows) std::sort(us.begin(), us.end());
  auto has_run = [threshold](const std::vector<Index>& sorted) {
    Index run = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      run = (i > 0 && sorted[i] == sorted[i - 1] + 1) ? run + 1 : 1;
      if (run >= threshold) return true;
    }
    return false;
  };
  auto g = [&](Index u, Index v) {
    auto it = columns.find(u);
    if (it == columns.end()) return sentinel;
    auto w = std::lower_bound(it->second.begin(), it->second.end(), v);
    return w == it->second.end() ? sentinel : *w;
  };
  const Index top = Index{1} << k;

  std::array<std::vector<Index>, 4> flat;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const Index u = cover[i][0];
    const Index v = cover[i][1];
    int cls = 3;
    if (has_run(columns[u])) {
      cls = 0;
    } else if (has_run(rows[v])) {
      cls = 1;
    } else {
      const Index here = g(u, v);
      bool jump = false;
      for (Index nb : {u - 1, u + 1}) {
        if (nb < 0 || nb >= top) continue;
        const Index there = g(nb, v);
        if (there - here > 1 || here - there > 1) jump = true;
      }
      const Index below[2] = {u, v - 1};
      if (jump || cover.contains(below)) cls = 2;
    }
    flat[cls].push_back(u);
    flat[cls].push_back(v);
  }
  PlanarClassification out;
  out.level = k;
  out.run_threshold = threshold;
  const std::size_t drops[4] = {0, 1, 0, 1};
  for (std::size_t c = 0; c < 4; ++c) {
    auto& pc = out.classes[c];
    pc.cells = DyadicCover(k, 2, std::move(flat[c]));
    pc.drop = drops[c];
    pc.delta = pc.cells.empty() ? 0 : max_fiber(pc.cells, pc.drop);
    pc.eps = (pc.delta <= 1 || k == 0) ? 0.0 : std::log2(static_cast<double>(pc.delta)) / k;
  }
  return out;
}

}  // namespace metricdim
