#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metricdim/errors.hpp"
#include "metricdim/point_set.hpp"

namespace metricdim {

namespace detail {

inline std::optional<int> min_level(std::optional<int> a, std::optional<int> b) {
  if (a && b) return std::min(*a, *b);
  return a ? a : b;
}

}  // namespace detail

/// All 2^(depth+1) interval endpoints of the depth-d middle-lambda Cantor
/// construction on [0, 1]. For lambda = 1/3 and depth <= 30 the endpoints are
/// computed as exact ternary fractions n / 3^d.
///
/// Every interval at depth d has width rho^d with rho = (1 - lambda) / 2, and a
/// cube at least that wide meets an interval only if it holds one of the
/// interval's endpoints, so covers are exact up to floor(d log2(1/rho)).
inline PointSet cantor(double lambda, int depth) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ArgumentError("Cantor ratio must lie in (0, 1)");
  if (depth < 0 || depth > 40) throw ArgumentError("Cantor depth must lie in [0, 40]");
  const double rho = (1.0 - lambda) / 2.0;
  const int trusted = std::min(kMaxLevel, static_cast<int>(std::floor(depth * std::log2(1.0 / rho) + 1e-9)));
  std::vector<double> points;
  points.reserve(std::size_t{2} << depth);
  if (lambda == 1.0 / 3.0 && depth <= 30) {
    std::int64_t denom = 1;
    for (int i = 0; i < depth; ++i) denom *= 3;
    std::vector<std::int64_t> left{0};
    std::int64_t width = denom;
    for (int level = 0; level < depth; ++level) {
      std::vector<std::int64_t> next;
      next.reserve(left.size() * 2);
      for (auto a : left) {
        next.push_back(a);
        next.push_back(a + 2 * (width / 3));
      }
      left = std::move(next);
      width /= 3;
    }
    const auto d = static_cast<double>(denom);
    for (auto a : left) {
      points.push_back(static_cast<double>(a) / d);
      points.push_back(static_cast<double>(a + 1) / d);
    }
  } else {
    // Children inherit their parent's outer endpoints bit for bit, so depth
    // d endpoints reappear unchanged at depth d + 1.
    std::vector<std::pair<double, double>> intervals{{0.0, 1.0}};
    double width = 1.0;
    for (int level = 0; level < depth; ++level) {
      width *= rho;
      std::vector<std::pair<double, double>> next;
      next.reserve(intervals.size() * 2);
      for (const auto& [lo, hi] : intervals) {
        next.emplace_back(lo, std::min(1.0, lo + width));
        next.emplace_back(std::max(0.0, hi - width), hi);
      }
      intervals = std::move(next);
    }
    for (const auto& [lo, hi] : intervals) {
      points.push_back(lo);
      points.push_back(hi);
    }
  }
  return PointSet(1, std::move(points), {}, trusted);
}

/// {1/k : 1 <= k <= K} together with 0. The missing tail 1/k, k > K, lies in
/// [0, 1/K], so covers are exact while 2^-k >= 1/K.
inline PointSet reciprocals(std::int64_t count) {
  if (count < 1) throw ArgumentError("reciprocal count must be at least 1");
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(count) + 1);
  points.push_back(0.0);
  for (std::int64_t k = 1; k <= count; ++k) points.push_back(1.0 / static_cast<double>(k));
  return PointSet(1, std::move(points), {}, static_cast<int>(std::floor(std::log2(static_cast<double>(count)))));
}

/// {k!/K! : 1 <= k <= K} together with 0, i.e. {k!} rescaled into [0, 1].
inline PointSet factorials(int count) {
  if (count < 1) throw ArgumentError("factorial count must be at least 1");
  if (count > 20) throw ArgumentError("factorial count above 20 overflows 64-bit integer arithmetic");
  std::vector<double> points{0.0};
  for (int k = 1; k <= count; ++k) {
    // k!/K! = 1 / ((k+1)(k+2)...K), the product is exact in 64 bits.
    std::uint64_t tail = 1;
    for (int j = k + 1; j <= count; ++j) tail *= static_cast<std::uint64_t>(j);
    points.push_back(1.0 / static_cast<double>(tail));
  }
  return PointSet(1, std::move(points));
}

/// count equally spaced points i/(count-1) on [0, 1].
inline PointSet uniform_grid(std::int64_t count) {
  if (count < 1) throw ArgumentError("grid size must be at least 1");
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(count));
  if (count == 1) return PointSet(1, {0.0});
  for (std::int64_t i = 0; i < count; ++i) {
    points.push_back(static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return PointSet(1, std::move(points), {}, static_cast<int>(std::floor(std::log2(static_cast<double>(count - 1)))));
}

inline PointSet product(const PointSet& a, const PointSet& b) {
  const std::size_t n = a.dim() + b.dim();
  std::vector<double> coords;
  coords.reserve(a.size() * b.size() * n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      coords.insert(coords.end(), a[i].begin(), a[i].end());
      coords.insert(coords.end(), b[j].begin(), b[j].end());
    }
  }
  return PointSet(n, std::move(coords), a.metric(), detail::min_level(a.trusted_level(), b.trusted_level()));
}

/// {((x - y + 1)/2, (x + y)/2) : x in a, y in b}: the rotation (x, y) -> (x - y, x + y)
/// followed by the similarity u -> u/2 + (1/2, 0) that lands it in I^2.
inline PointSet rotated_product(const PointSet& a, const PointSet& b) {
  if (a.dim() != 1 || b.dim() != 1) throw ArgumentError("rotated product takes two one-dimensional sets");
  std::vector<double> coords;
  coords.reserve(a.size() * b.size() * 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i][0];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double y = b[j][0];
      coords.push_back(((x - y) + 1.0) / 2.0);
      coords.push_back((x + y) / 2.0);
    }
  }
  return PointSet(2, std::move(coords), a.metric(), detail::min_level(a.trusted_level(), b.trusted_level()));
}

/// Row-major m x n matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  static Matrix identity(std::size_t n) {
    Matrix m{n, n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) m.values[i * n + i] = 1.0;
    return m;
  }
};

struct AffineImage {
  PointSet points;
  double lower_lipschitz = 0.0;  ///< min |Mp - Mq| / |p - q| over sampled pairs (sup-norm)
  double upper_lipschitz = 0.0;  ///< max of the same ratio
};

/// Sample pairs used to estimate bi-Lipschitz constants are taken from at most
/// this many points, chosen by stride.
inline constexpr std::size_t kLipschitzSampleCap = 2048;

/// {M p + c : p in a}. Each output coordinate is accumulated left to right and
/// the offset added last.
inline AffineImage affine_image(const PointSet& a, const Matrix& m, std::span<const double> offset) {
  if (m.cols != a.dim() || m.values.size() != m.rows * m.cols || offset.size() != m.rows || m.rows == 0) {
    throw ArgumentError("affine map dimensions do not match the point set");
  }
  std::vector<double> coords;
  coords.reserve(a.size() * m.rows);
  auto apply = [&](std::span<const double> p, std::vector<double>& out) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      double acc = m(r, 0) * p[0];
      for (std::size_t c = 1; c < m.cols; ++c) acc += m(r, c) * p[c];
      out.push_back(acc + offset[r]);
    }
  };
  for (std::size_t i = 0; i < a.size(); ++i) apply(a[i], coords);

  const std::size_t sample = std::min(a.size(), kLipschitzSampleCap);
  std::vector<std::size_t> picks(sample);
  for (std::size_t s = 0; s < sample; ++s) picks[s] = s * a.size() / sample;
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  std::vector<double> fp;
  std::vector<double> fq;
  for (std::size_t s = 0; s < sample; ++s) {
    for (std::size_t t = s + 1; t < sample; ++t) {
      auto p = a[picks[s]];
      auto q = a[picks[t]];
      const double d = sup_distance(p, q);
      if (d == 0.0) continue;
      fp.clear();
      fq.clear();
      apply(p, fp);
      apply(q, fq);
      const double ratio = sup_distance(fp, fq) / d;
      lower = std::min(lower, ratio);
      upper = std::max(upper, ratio);
    }
  }
  if (upper == 0.0 && sample < 2) {
    lower = 1.0;
    upper = 1.0;
  }
  std::optional<int> trusted = a.trusted_level();
  if (trusted && upper > 1.0) trusted = *trusted - static_cast<int>(std::ceil(std::log2(upper)));
  return AffineImage{PointSet(m.rows, std::move(coords), a.metric(), trusted), lower, upper};
}

/// Graph {(u, f(u))} of a finitely tabulated function.
struct GraphTable {
  std::size_t base_dim = 1;
  std::vector<double> base;    ///< row-major base points, base_dim per row
  std::vector<double> values;  ///< one value per base point
};

inline PointSet graph_sample(const GraphTable& table) {
  if (table.base_dim == 0 || table.base.size() != table.values.size() * table.base_dim) {
    throw ArgumentError("graph table base and values disagree in length");
  }
  std::vector<double> coords;
  coords.reserve(table.values.size() * (table.base_dim + 1));
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    for (std::size_t c = 0; c < table.base_dim; ++c) coords.push_back(table.base[i * table.base_dim + c]);
    coords.push_back(table.values[i]);
  }
  return PointSet(table.base_dim + 1, std::move(coords));
}

inline PointSet set_union(const PointSet& a, const PointSet& b) {
  if (a.dim() != b.dim()) throw ArgumentError("union of point sets of different dimension");
  std::vector<double> coords(a.coords().begin(), a.coords().end());
  coords.insert(coords.end(), b.coords().begin(), b.coords().end());
  return PointSet(a.dim(), std::move(coords), a.metric(), detail::min_level(a.trusted_level(), b.trusted_level()));
}

}  // namespace metricdim
