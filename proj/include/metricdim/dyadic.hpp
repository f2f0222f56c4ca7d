#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metricdim/errors.hpp"
#include "metricdim/point_set.hpp"

namespace metricdim {

using Index = std::int64_t;

/// The half-open cube prod_i [v_i 2^-k, (v_i + 1) 2^-k).
struct DyadicCube {
  int level = 0;
  std::vector<Index> index;

  [[nodiscard]] double side() const { return std::ldexp(1.0, -level); }
  [[nodiscard]] double lower(std::size_t i) const { return std::ldexp(static_cast<double>(index[i]), -level); }
  [[nodiscard]] double upper(std::size_t i) const { return std::ldexp(static_cast<double>(index[i] + 1), -level); }

  [[nodiscard]] bool contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (p[i] < lower(i) || p[i] >= upper(i)) return false;
    }
    return true;
  }

  /// The level-`coarser` cube containing this one.
  [[nodiscard]] DyadicCube ancestor(int coarser) const {
    if (coarser < 0 || coarser > level) throw ArgumentError("ancestor level out of range");
    DyadicCube up{coarser, index};
    for (auto& v : up.index) v >>= (level - coarser);
    return up;
  }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/// A finite set of level-k lattice indices in Z^n, sorted lexicographically.
/// This is the canonical approximation of a set at level k; size() is N_k.
class DyadicCover {
 public:
  DyadicCover() = default;

  DyadicCover(int level, std::size_t dim, std::vector<Index> flat_indices) : level_(level), dim_(dim) {
    if (level < 0 || level > kMaxLevel) throw ArgumentError("dyadic level out of range");
    if (dim == 0) throw ArgumentError("cover dimension must be positive");
    if (flat_indices.size() % dim != 0) throw ArgumentError("index count is not a multiple of the dimension");
    canonicalize(std::move(flat_indices));
  }

  static DyadicCover from_tuples(int level, const std::vector<std::vector<Index>>& tuples, std::size_t dim) {
    std::vector<Index> flat;
    flat.reserve(tuples.size() * dim);
    for (const auto& t : tuples) {
      if (t.size() != dim) throw ArgumentError("index tuple has wrong dimension");
      flat.insert(flat.end(), t.begin(), t.end());
    }
    return DyadicCover(level, dim, std::move(flat));
  }

  [[nodiscard]] int level() const { return level_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : indices_.size() / dim_; }
  [[nodiscard]] bool empty() const { return indices_.empty(); }
  [[nodiscard]] std::span<const Index> flat() const { return indices_; }

  [[nodiscard]] std::span<const Index> operator[](std::size_t i) const {
    return {indices_.data() + i * dim_, dim_};
  }

  [[nodiscard]] DyadicCube cube(std::size_t i) const {
    auto v = (*this)[i];
    return DyadicCube{level_, std::vector<Index>(v.begin(), v.end())};
  }

  [[nodiscard]] std::optional<std::size_t> find(std::span<const Index> v) const {
    std::size_t lo = 0;
    std::size_t hi = size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      auto m = (*this)[mid];
      if (std::lexicographical_compare(m.begin(), m.end(), v.begin(), v.end())) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo < size() && std::equal(v.begin(), v.end(), (*this)[lo].begin())) return lo;
    return std::nullopt;
  }

  [[nodiscard]] bool contains(std::span<const Index> v) const { return find(v).has_value(); }

  /// Every index component in {0, ..., 2^k - 1}.
  [[nodiscard]] bool within_unit_cube() const {
    const Index top = Index{1} << level_;
    return std::all_of(indices_.begin(), indices_.end(), [top](Index v) { return v >= 0 && v < top; });
  }

  friend bool operator==(const DyadicCover&, const DyadicCover&) = default;

 private:
  void canonicalize(std::vector<Index> flat) {
    const std::size_t n = flat.size() / dim_;
    auto row = [&](std::size_t i) { return std::span<const Index>(flat.data() + i * dim_, dim_); };
    // Already sorted input (the common case) only needs duplicates dropped.
    bool ordered = true;
    for (std::size_t k = 1; k < n && ordered; ++k) {
      auto a = row(k - 1);
      auto b = row(k);
      ordered = !std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    }
    if (ordered) {
      indices_.reserve(flat.size());
      for (std::size_t k = 0; k < n; ++k) {
        auto r = row(k);
        if (k > 0 && std::equal(r.begin(), r.end(), row(k - 1).begin())) continue;
        indices_.insert(indices_.end(), r.begin(), r.end());
      }
      return;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      auto ra = row(a);
      auto rb = row(b);
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    indices_.reserve(flat.size());
    for (std::size_t k = 0; k < n; ++k) {
      auto r = row(order[k]);
      if (k > 0 && std::equal(r.begin(), r.end(), row(order[k - 1]).begin())) continue;
      indices_.insert(indices_.end(), r.begin(), r.end());
    }
  }

  int level_ = 0;
  std::size_t dim_ = 0;
  std::vector<Index> indices_;
};

/// Level-k index of coordinate x in [0, 1]; the right endpoint 1 clamps into
/// the last cube.
inline Index dyadic_index(double x, int level) {
  const Index top = (Index{1} << level) - 1;
  const auto v = static_cast<Index>(std::floor(std::ldexp(x, level)));
  return std::min(v, top);
}

/// B_k of a sample of I^n: the half-open level-k cubes containing its points.
inline DyadicCover cover_points(const PointSet& ps, int level) {
  if (level < 0 || level > kMaxLevel) throw ArgumentError("dyadic level out of range: " + std::to_string(level));
  const std::size_t n = ps.dim();
  std::vector<Index> flat;
  flat.reserve(ps.size() * n);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps[i];
    for (double x : p) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("point " + format_point(p) + " lies outside the unit cube");
      }
      flat.push_back(dyadic_index(x, level));
    }
  }
  return DyadicCover(level, n, std::move(flat));
}

/// Recomputes the cover of `ps` at a finer level and checks that every new
/// cube descends from `cover`.
inline DyadicCover refine(const DyadicCover& cover, const PointSet& ps, int finer) {
  if (finer <= cover.level()) {
    throw ArgumentError("refinement level " + std::to_string(finer) + " must exceed cover level " +
                        std::to_string(cover.level()));
  }
  DyadicCover next = cover_points(ps, finer);
  const int shift = finer - cover.level();
  std::vector<Index> parent(next.dim());
  for (std::size_t i = 0; i < next.size(); ++i) {
    auto v = next[i];
    for (std::size_t c = 0; c < v.size(); ++c) parent[c] = v[c] >> shift;
    if (!cover.contains(parent)) throw ContractViolation("cover was not produced from this point set");
  }
  return next;
}

/// Cartesian product of two covers at the same level.
inline DyadicCover cover_product(const DyadicCover& a, const DyadicCover& b) {
  if (a.level() != b.level()) throw ArgumentError("product of covers requires a common level");
  std::vector<Index> flat;
  flat.reserve(a.size() * b.size() * (a.dim() + b.dim()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      flat.insert(flat.end(), a[i].begin(), a[i].end());
      flat.insert(flat.end(), b[j].begin(), b[j].end());
    }
  }
  return DyadicCover(a.level(), a.dim() + b.dim(), std::move(flat));
}

/// Image of a cover under a coordinate selection (0-based, strictly increasing).
inline DyadicCover project(const DyadicCover& cover, std::span<const std::size_t> selection) {
  if (selection.empty()) throw ArgumentError("projection needs at least one coordinate");
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (selection[i] >= cover.dim() || (i > 0 && selection[i] <= selection[i - 1])) {
      throw ArgumentError("coordinate selection must be strictly increasing within [0, n)");
    }
  }
  std::vector<Index> flat;
  flat.reserve(cover.size() * selection.size());
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto v = cover[i];
    for (std::size_t c : selection) flat.push_back(v[c]);
  }
  return DyadicCover(cover.level(), selection.size(), std::move(flat));
}

/// Slices of a cover over its first m coordinates.
struct FiberFamily {
  int level = 0;
  std::size_t base_dim = 0;
  std::size_t fiber_dim = 0;
  std::map<std::vector<Index>, DyadicCover> fibers;

  /// Rebuilds the n-dimensional cover as the union of {u} x fiber(u).
  [[nodiscard]] DyadicCover reconstruct() const {
    std::vector<Index> flat;
    for (const auto& [base, fiber] : fibers) {
      for (std::size_t i = 0; i < fiber.size(); ++i) {
        flat.insert(flat.end(), base.begin(), base.end());
        flat.insert(flat.end(), fiber[i].begin(), fiber[i].end());
      }
    }
    return DyadicCover(level, base_dim + fiber_dim, std::move(flat));
  }
};

inline FiberFamily fibers(const DyadicCover& cover, std::size_t m) {
  if (m == 0 || m >= cover.dim()) {
    throw ArgumentError("fiber split position must satisfy 0 < m < n");
  }
  FiberFamily family{cover.level(), m, cover.dim() - m, {}};
  std::map<std::vector<Index>, std::vector<Index>> grouped;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto v = cover[i];
    auto& bucket = grouped[std::vector<Index>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m))];
    bucket.insert(bucket.end(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  }
  for (auto& [base, flat] : grouped) {
    family.fibers.emplace(base, DyadicCover(cover.level(), cover.dim() - m, std::move(flat)));
  }
  return family;
}

/// A king-move connected component of a cover.
struct Component {
  DyadicCover cells;
  double diameter = 0.0;  ///< sup-norm diameter of the union of its closed cubes
};

/// Connected components under the adjacency "index difference in {-1,0,1}^n".
/// Components are listed in order of their least cell.
inline std::vector<Component> components(const DyadicCover& cover) {
  const std::size_t count = cover.size();
  const std::size_t n = cover.dim();
  std::vector<std::size_t> parent(count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find_root = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t neighbours = 1;
  for (std::size_t c = 0; c < n; ++c) neighbours *= 3;
  std::vector<Index> probe(n);
  for (std::size_t i = 0; i < count; ++i) {
    auto v = cover[i];
    for (std::size_t code = 0; code < neighbours; ++code) {
      std::size_t rest = code;
      for (std::size_t c = 0; c < n; ++c) {
        probe[c] = v[c] + static_cast<Index>(rest % 3) - 1;
        rest /= 3;
      }
      if (auto j = cover.find(probe); j && *j > i) {
        const std::size_t a = find_root(i);
        const std::size_t b = find_root(*j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, std::vector<Index>> grouped;
  for (std::size_t i = 0; i < count; ++i) {
    auto& flat = grouped[find_root(i)];
    flat.insert(flat.end(), cover[i].begin(), cover[i].end());
  }
  std::vector<Component> out;
  out.reserve(grouped.size());
  for (auto& [root, flat] : grouped) {
    DyadicCover cells(cover.level(), n, std::move(flat));
    Index spread = 0;
    for (std::size_t c = 0; c < n; ++c) {
      Index lo = cells[0][c];
      Index hi = lo;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        lo = std::min(lo, cells[i][c]);
        hi = std::max(hi, cells[i][c]);
      }
      spread = std::max(spread, hi - lo);
    }
    const double diameter = std::ldexp(static_cast<double>(spread + 1), -cover.level());
    out.push_back(Component{std::move(cells), diameter});
  }
  return out;
}

inline double max_component_diameter(const DyadicCover& cover) {
  double best = 0.0;
  for (const auto& c : components(cover)) best = std::max(best, c.diameter);
  return best;
}

/// Occupancy of level-j boxes: for each occupied level-j box, the number of
/// level-k cells of the cover inside it. Requires a cover inside I^n.
inline std::map<std::vector<Index>, std::uint64_t> box_occupancy(const DyadicCover& cover, int box_level) {
  if (box_level < 0 || box_level > cover.level()) {
    throw ArgumentError("box level " + std::to_string(box_level) + " must lie in [0, cover level]");
  }
  const int shift = cover.level() - box_level;
  std::map<std::vector<Index>, std::uint64_t> counts;
  std::vector<Index> key(cover.dim());
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto v = cover[i];
    for (std::size_t c = 0; c < v.size(); ++c) key[c] = v[c] >> shift;
    ++counts[key];
  }
  return counts;
}

/// Number of level-k cells in one level-j box of dimension n.
inline double box_capacity(int cover_level, int box_level, std::size_t dim) {
  return std::ldexp(1.0, (cover_level - box_level) * static_cast<int>(dim));
}

/// True when some level-j box has an occupied fraction of at least theta.
inline bool has_full_box(const DyadicCover& cover, int box_level, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("fullness threshold must lie in (0, 1]");
  const double capacity = box_capacity(cover.level(), box_level, cover.dim());
  for (const auto& [box, count] : box_occupancy(cover, box_level)) {
    if (static_cast<double>(count) >= theta * capacity) return true;
  }
  return false;
}

}  // namespace metricdim
