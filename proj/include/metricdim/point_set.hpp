#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricdim/errors.hpp"

namespace metricdim {

/// Largest dyadic level any cover is computed at; 2^k must fit an int64 index.
inline constexpr int kMaxLevel = 62;

/// Relative slack applied to every "distance >= r" and "distance <= R"
/// comparison so that exactly representable separations survive rounding.
inline constexpr double kDistanceTolerance = 1e-12;

/// Sup-norm metric, optionally snowflaked: d(x, y) = |x - y|_inf ^ exponent.
struct Metric {
  double snowflake_exponent = 1.0;

  /// Threshold in raw sup-norm units that corresponds to metric radius r.
  [[nodiscard]] double raw_radius(double r) const {
    return snowflake_exponent == 1.0 ? r : std::pow(r, 1.0 / snowflake_exponent);
  }

  friend bool operator==(const Metric&, const Metric&) = default;
};

/// Shortest decimal string that parses back to exactly x.
inline std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("failed to format a real number");
  return std::string(buf, end);
}

inline std::string format_point(std::span<const double> p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? ", " : "") + format_real(p[i]);
  return out + ")";
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Finite set of points in R^n, stored row-major, sorted lexicographically and
/// deduplicated on construction. trusted_level() is the finest dyadic level at
/// which the sample's cover is known to match the cover of the set it
/// approximates; an empty value means the sample is the set itself.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::size_t dim, std::vector<double> coords, Metric metric = {},
           std::optional<int> trusted_level = std::nullopt)
      : dim_(dim), metric_(metric), trusted_level_(trusted_level) {
    if (dim == 0) throw ArgumentError("point set dimension must be positive");
    if (coords.size() % dim != 0) {
      throw ArgumentError("coordinate count is not a multiple of the dimension");
    }
    if (!(metric.snowflake_exponent > 0.0 && metric.snowflake_exponent <= 1.0)) {
      throw ArgumentError("snowflake exponent must lie in (0, 1]");
    }
    for (double c : coords) {
      if (!std::isfinite(c)) throw DomainError("point coordinates must be finite");
    }
    canonicalize(std::move(coords));
  }

  static PointSet from_rows(const std::vector<std::vector<double>>& rows, Metric metric = {},
                            std::optional<int> trusted_level = std::nullopt) {
    if (rows.empty()) throw ArgumentError("cannot infer dimension of an empty row list");
    const std::size_t dim = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * dim);
    for (const auto& row : rows) {
      if (row.size() != dim) throw ArgumentError("rows have inconsistent dimension");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return PointSet(dim, std::move(flat), metric, trusted_level);
  }

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  [[nodiscard]] bool empty() const { return coords_.empty(); }
  [[nodiscard]] const Metric& metric() const { return metric_; }
  [[nodiscard]] std::optional<int> trusted_level() const { return trusted_level_; }
  [[nodiscard]] std::span<const double> coords() const { return coords_; }

  [[nodiscard]] std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }

  /// Trusted level with the finite-sample default applied.
  [[nodiscard]] int level_limit() const { return trusted_level_.value_or(kMaxLevel); }

  [[nodiscard]] PointSet with_metric(Metric metric) const {
    PointSet copy = *this;
    if (!(metric.snowflake_exponent > 0.0 && metric.snowflake_exponent <= 1.0)) {
      throw ArgumentError("snowflake exponent must lie in (0, 1]");
    }
    copy.metric_ = metric;
    return copy;
  }

  [[nodiscard]] PointSet with_trusted_level(std::optional<int> level) const {
    PointSet copy = *this;
    copy.trusted_level_ = level;
    return copy;
  }

  /// Index of p in the set, if present (exact coordinate match).
  [[nodiscard]] std::optional<std::size_t> find(std::span<const double> p) const {
    if (p.size() != dim_) return std::nullopt;
    std::size_t lo = 0;
    std::size_t hi = size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (less((*this)[mid], p)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo < size() && std::equal(p.begin(), p.end(), (*this)[lo].begin())) return lo;
    return std::nullopt;
  }

  [[nodiscard]] bool contains(std::span<const double> p) const { return find(p).has_value(); }

  /// True when every coordinate lies in [0, 1].
  [[nodiscard]] bool within_unit_cube() const {
    return std::all_of(coords_.begin(), coords_.end(),
                       [](double c) { return c >= 0.0 && c <= 1.0; });
  }

  /// Distance in the declared metric.
  [[nodiscard]] double distance(std::size_t i, std::size_t j) const {
    const double d = sup_distance((*this)[i], (*this)[j]);
    return metric_.snowflake_exponent == 1.0 ? d : std::pow(d, metric_.snowflake_exponent);
  }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_ && a.metric_ == b.metric_;
  }

 private:
  static bool less(std::span<const double> a, std::span<const double> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }

  void canonicalize(std::vector<double> coords) {
    const std::size_t n = coords.size() / dim_;
    auto row = [&](std::size_t i) { return std::span<const double>(coords.data() + i * dim_, dim_); };
    bool ordered = true;
    for (std::size_t k = 1; k < n && ordered; ++k) ordered = less(row(k - 1), row(k));
    if (ordered) {
      coords_ = std::move(coords);
      return;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return less(row(a), row(b)); });
    coords_.clear();
    coords_.reserve(coords.size());
    for (std::size_t k = 0; k < n; ++k) {
      auto r = row(order[k]);
      if (k > 0 && std::equal(r.begin(), r.end(), row(order[k - 1]).begin())) continue;
      coords_.insert(coords_.end(), r.begin(), r.end());
    }
  }

  std::size_t dim_ = 0;
  std::vector<double> coords_;
  Metric metric_;
  std::optional<int> trusted_level_;
};

}  // namespace metricdim
