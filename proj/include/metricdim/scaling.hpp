#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"
#include "metricdim/point_set.hpp"

namespace metricdim {

struct CurveEntry {
  int level = 0;
  std::uint64_t count = 0;
  friend bool operator==(const CurveEntry&, const CurveEntry&) = default;
};

/// (k, N_k) pairs, strictly increasing in k. Counts are positive and
/// nondecreasing; for consecutive levels N_{k+1} <= 2^n N_k when n is known.
class ScalingCurve {
 public:
  ScalingCurve() = default;

  explicit ScalingCurve(std::vector<CurveEntry> entries, std::optional<std::size_t> dim = std::nullopt)
      : entries_(std::move(entries)), dim_(dim) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.level < 0) throw ArgumentError("curve levels must be nonnegative");
      if (e.count == 0) throw ArgumentError("curve counts must be positive");
      if (i == 0) continue;
      const auto& prev = entries_[i - 1];
      if (e.level <= prev.level) throw ArgumentError("curve levels must be strictly increasing");
      if (e.count < prev.count) {
        throw ArgumentError("curve counts must be nondecreasing (level " + std::to_string(e.level) + ")");
      }
      if (dim_ && e.level == prev.level + 1 && *dim_ < 64 &&
          static_cast<double>(e.count) > std::ldexp(static_cast<double>(prev.count), static_cast<int>(*dim_))) {
        throw ArgumentError("curve count at level " + std::to_string(e.level) + " exceeds 2^n times its parent");
      }
    }
  }

  [[nodiscard]] const std::vector<CurveEntry>& entries() const { return entries_; }
  [[nodiscard]] std::optional<std::size_t> dim() const { return dim_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  [[nodiscard]] std::optional<std::uint64_t> count_at(int level) const {
    for (const auto& e : entries_) {
      if (e.level == level) return e.count;
    }
    return std::nullopt;
  }

  friend bool operator==(const ScalingCurve&, const ScalingCurve&) = default;

 private:
  std::vector<CurveEntry> entries_;
  std::optional<std::size_t> dim_;
};

/// N_k(ps) for k in [k_min, k_max]. Levels past the sample's trusted level
/// are rejected rather than silently undercounted.
inline ScalingCurve boxcount_curve(const PointSet& ps, int k_min, int k_max) {
  if (k_min < 0 || k_max < k_min) throw ArgumentError("box-count levels must satisfy 0 <= k_min <= k_max");
  if (k_max > ps.level_limit()) {
    throw ArgumentError("level " + std::to_string(k_max) + " exceeds the sample's trusted level " +
                        std::to_string(ps.level_limit()));
  }
  // Coarser covers are the finest one with indices shifted down.
  const auto finest = cover_points(ps, k_max);
  std::vector<CurveEntry> entries(static_cast<std::size_t>(k_max - k_min + 1));
  entries.back() = {k_max, static_cast<std::uint64_t>(finest.size())};
  std::vector<Index> flat(finest.flat().begin(), finest.flat().end());
  for (int k = k_max - 1; k >= k_min; --k) {
    for (auto& v : flat) v >>= 1;
    DyadicCover coarse(k, ps.dim(), flat);
    flat.assign(coarse.flat().begin(), coarse.flat().end());
    entries[static_cast<std::size_t>(k - k_min)] = {k, static_cast<std::uint64_t>(coarse.size())};
  }
  return ScalingCurve(std::move(entries), ps.dim());
}

inline ScalingCurve boxcount_curve(const std::vector<DyadicCover>& covers) {
  std::vector<CurveEntry> entries;
  std::optional<std::size_t> dim;
  for (const auto& c : covers) {
    entries.push_back({c.level(), static_cast<std::uint64_t>(c.size())});
    dim = c.dim();
  }
  return ScalingCurve(std::move(entries), dim);
}

}  // namespace metricdim
