#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"
#include "metricdim/packing.hpp"
#include "metricdim/parallel.hpp"
#include "metricdim/point_set.hpp"
#include "metricdim/scaling.hpp"

namespace metricdim {

struct DimEstimate {
  double value = 0.0;
  std::string method;
  std::string window;   ///< "k_min..k_max" or a scale description
  double spread = 0.0;  ///< max - min of the per-sample slopes behind value
};

struct LevelWindow {
  int k_min = 0;
  int k_max = 0;

  [[nodiscard]] std::string describe() const { return std::to_string(k_min) + ".." + std::to_string(k_max); }
};

namespace detail {

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const auto m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

/// max - min of (y_j - y_i)/(x_j - x_i) over all pairs i < j.
inline double pairwise_slope_spread(std::span<const double> x, std::span<const double> y) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double s = (y[j] - y[i]) / (x[j] - x[i]);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  return x.size() < 2 ? 0.0 : hi - lo;
}

inline double clamp_dimension(double value, double ceiling) { return std::clamp(value, 0.0, ceiling); }

/// Upper bound on any dimension of a subset of R^n under the set's metric.
inline double dimension_ceiling(std::size_t n, const Metric& metric) {
  return static_cast<double>(n) / metric.snowflake_exponent;
}

/// Smallest element at or above the q-quantile (q = 1 is the max).
inline double upper_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto m = values.size();
  auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m)));
  idx = std::clamp<std::size_t>(idx, 1, m) - 1;
  return values[idx];
}

inline std::vector<CurveEntry> window_entries(const ScalingCurve& curve, LevelWindow w) {
  std::vector<CurveEntry> out;
  for (const auto& e : curve.entries()) {
    if (e.level >= w.k_min && e.level <= w.k_max) out.push_back(e);
  }
  return out;
}

inline DimEstimate fit_entries(const std::vector<CurveEntry>& entries, std::optional<std::size_t> dim,
                               std::string method, std::string window) {
  if (entries.size() < 2) throw ArgumentError("fit window holds fewer than 2 curve entries");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& e : entries) {
    x.push_back(e.level);
    y.push_back(std::log2(static_cast<double>(e.count)));
  }
  const double ceiling = dim ? static_cast<double>(*dim) : std::numeric_limits<double>::infinity();
  return DimEstimate{clamp_dimension(least_squares_slope(x, y), ceiling), std::move(method), std::move(window),
                     pairwise_slope_spread(x, y)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Upper Minkowski dimension

/// Least-squares slope of log2 N_k against k over the window.
inline DimEstimate udim_fit(const ScalingCurve& curve, LevelWindow window) {
  if (window.k_max <= window.k_min) throw ArgumentError("udim window needs k_max > k_min");
  if (curve.empty() || window.k_min < curve.entries().front().level ||
      window.k_max > curve.entries().back().level) {
    throw ArgumentError("udim window " + window.describe() + " lies outside the curve's levels");
  }
  return detail::fit_entries(detail::window_entries(curve, window), curve.dim(), "udim-boxcount",
                             window.describe());
}

/// Fit of the pointwise maximum of the members' curves.
inline DimEstimate family_udim(std::span<const ScalingCurve> curves, LevelWindow window) {
  if (curves.empty()) throw DomainError("family_udim of an empty family");
  if (window.k_max <= window.k_min) throw ArgumentError("udim window needs k_max > k_min");
  std::vector<CurveEntry> envelope;
  std::optional<std::size_t> dim;
  for (int k = window.k_min; k <= window.k_max; ++k) {
    std::uint64_t best = 0;
    for (const auto& c : curves) {
      const auto count = c.count_at(k);
      if (!count) throw ArgumentError("family member lacks level " + std::to_string(k));
      best = std::max(best, *count);
      if (c.dim()) dim = c.dim();
    }
    envelope.push_back({k, best});
  }
  return detail::fit_entries(envelope, dim, "udim-family", window.describe());
}

/// E_x = {y : (x, y) in ps} for every distinct base point x (the first m
/// coordinates), keyed by x. Fibers keep the sample's metric and trusted level.
inline std::map<std::vector<double>, PointSet> point_fibers(const PointSet& ps, std::size_t m) {
  if (m == 0 || m >= ps.dim()) throw ArgumentError("fiber split position must satisfy 0 < m < n");
  std::map<std::vector<double>, std::vector<double>> grouped;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto row = ps[i];
    auto& bucket = grouped[std::vector<double>(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m))];
    bucket.insert(bucket.end(), row.begin() + static_cast<std::ptrdiff_t>(m), row.end());
  }
  std::map<std::vector<double>, PointSet> out;
  for (auto& [base, coords] : grouped) {
    out.emplace(base, PointSet(ps.dim() - m, std::move(coords), ps.metric(), ps.trusted_level()));
  }
  return out;
}

/// family_udim of the fibers E_x over the first m coordinates.
inline DimEstimate fiber_family_udim(const PointSet& ps, std::size_t m, LevelWindow window) {
  std::vector<ScalingCurve> curves;
  for (const auto& [base, fiber] : point_fibers(ps, m)) curves.push_back(boxcount_curve(fiber, window.k_min, window.k_max));
  return family_udim(curves, window);
}

struct NetSample {
  double radius = 0.0;
  std::uint64_t count = 0;
};

inline std::vector<NetSample> net_curve(const PointSet& ps, std::span<const double> radii,
                                        NetMode mode = NetMode::greedy, const PackingBudget& budget = {}) {
  std::vector<NetSample> out(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) { out[i] = {radii[i], net_number(ps, radii[i], mode, budget)}; });
  return out;
}

/// Slope of log net_r against -log r. Honours the set's snowflake metric.
inline DimEstimate net_udim(const PointSet& ps, std::span<const double> radii, NetMode mode = NetMode::greedy,
                            const PackingBudget& budget = {}) {
  if (radii.size() < 2) throw ArgumentError("net udim needs at least 2 radii");
  for (double r : radii) {
    if (!(r > 0.0)) throw ArgumentError("net radii must be positive");
  }
  const auto samples = net_curve(ps, radii, mode, budget);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : samples) {
    x.push_back(-std::log2(s.radius));
    y.push_back(std::log2(static_cast<double>(s.count)));
  }
  const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  return DimEstimate{detail::clamp_dimension(detail::least_squares_slope(x, y),
                                             detail::dimension_ceiling(ps.dim(), ps.metric())),
                     "udim-net", "r in [" + format_real(*lo) + ", " +
                                     format_real(*hi) + "]",
                     detail::pairwise_slope_spread(x, y)};
}

// ---------------------------------------------------------------------------
// Assouad dimension

struct ScalePair {
  double r = 0.0;
  double R = 0.0;
};

struct AdimScanParams {
  std::size_t centers = 64;                 ///< strided subsample size (index 0 always included)
  std::vector<std::size_t> center_indices;  ///< explicit centers; overrides the subsample
  std::vector<ScalePair> scale_pairs;
  double quantile = 1.0;
  NetMode mode = NetMode::greedy;
  PackingBudget budget{};
};

/// R = 2^-a for a in [a_min, a_max] and r = R 2^-b for b in [b_min, b_max].
inline std::vector<ScalePair> geometric_scale_pairs(int a_min, int a_max, int b_min, int b_max) {
  if (a_max < a_min || b_max < b_min || b_min < 1) throw ArgumentError("scale pair ranges are empty");
  std::vector<ScalePair> pairs;
  for (int a = a_min; a <= a_max; ++a) {
    for (int b = b_min; b <= b_max; ++b) pairs.push_back({std::ldexp(1.0, -a - b), std::ldexp(1.0, -a)});
  }
  return pairs;
}

/// One (x, r, R) evaluation of the scan.
struct AdimSample {
  std::size_t center = 0;
  double r = 0.0;
  double R = 0.0;
  std::uint64_t net = 0;
  double exponent = 0.0;  ///< log net / log(R/r)
};

inline std::vector<std::size_t> strided_centers(std::size_t size, std::size_t wanted) {
  wanted = std::clamp<std::size_t>(wanted, 1, size);
  std::vector<std::size_t> out(wanted);
  for (std::size_t i = 0; i < wanted; ++i) out[i] = i * size / wanted;
  return out;
}

namespace detail {

/// Rows of ps inside the closed sup-norm ball B(x, raw_R), in sorted order.
inline std::vector<double> ball_rows(const PointSet& ps, std::span<const double> x, double raw_R) {
  const std::size_t n = ps.dim();
  const double reach = raw_R * (1.0 + kDistanceTolerance);
  const auto coords = ps.coords();
  const std::size_t count = ps.size();
  // Rows are sorted lexicographically, so the first coordinate is sorted.
  std::size_t lo = 0;
  std::size_t hi = count;
  {
    std::size_t a = 0;
    std::size_t b = count;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (coords[mid * n] < x[0] - reach) a = mid + 1;
      else b = mid;
    }
    lo = a;
    b = count;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (coords[mid * n] <= x[0] + reach) a = mid + 1;
      else b = mid;
    }
    hi = a;
  }
  if (n == 1) return {coords.begin() + static_cast<std::ptrdiff_t>(lo), coords.begin() + static_cast<std::ptrdiff_t>(hi)};
  std::vector<double> rows;
  for (std::size_t i = lo; i < hi; ++i) {
    auto p = coords.subspan(i * n, n);
    if (sup_distance(p, x) <= reach) rows.insert(rows.end(), p.begin(), p.end());
  }
  return rows;
}

}  // namespace detail

/// Two-scale Assouad scan. Every (x, r, R) yields net_r(S ∩ B(x, R)). For
/// each distinct ratio R/r the selected quantile M of those counts is taken
/// over centers and R, and the value is the least-squares slope of log M
/// against log(R/r), so the constant C of the definition drops out as an
/// intercept. With a single ratio the quantile of the per-triple exponents is
/// reported instead. Pairs with r below the sample's smallest gap are skipped.
inline DimEstimate adim_scan(const PointSet& ps, const AdimScanParams& params,
                             std::vector<AdimSample>* table = nullptr) {
  if (ps.empty()) throw DomainError("adim scan of an empty point set");
  if (!(params.quantile > 0.0 && params.quantile <= 1.0)) throw ArgumentError("quantile must lie in (0, 1]");
  const double gap = min_separation(ps);
  std::vector<ScalePair> pairs;
  for (const auto& p : params.scale_pairs) {
    if (!(p.r > 0.0 && p.r < p.R)) throw ArgumentError("scale pairs must satisfy 0 < r < R");
    if (ps.metric().raw_radius(p.r) >= gap * (1.0 - kDistanceTolerance) || !std::isfinite(gap)) pairs.push_back(p);
  }
  if (pairs.empty()) throw DomainError("no scale pair is admissible at this sample's resolution");

  std::vector<std::size_t> centers = params.center_indices;
  if (centers.empty()) centers = strided_centers(ps.size(), params.centers);
  for (auto c : centers) {
    if (c >= ps.size()) throw ArgumentError("center index " + std::to_string(c) + " is out of range");
  }

  std::vector<AdimSample> samples(centers.size() * pairs.size());
  parallel_for(centers.size(), [&](std::size_t ci) {
    const auto x = ps[centers[ci]];
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      const auto& p = pairs[pi];
      const auto rows = detail::ball_rows(ps, x, ps.metric().raw_radius(p.R));
      const auto net = detail::net_of_rows(rows, ps.dim(), ps.metric().raw_radius(p.r), params.mode, params.budget);
      samples[ci * pairs.size() + pi] =
          AdimSample{centers[ci], p.r, p.R, net, std::log(static_cast<double>(net)) / std::log(p.R / p.r)};
    }
  });

  // Group by ratio, up to rounding.
  std::vector<double> ratios;
  for (const auto& p : pairs) ratios.push_back(p.R / p.r);
  std::sort(ratios.begin(), ratios.end());
  std::vector<double> distinct;
  for (double q : ratios) {
    if (distinct.empty() || q > distinct.back() * (1.0 + 1e-9)) distinct.push_back(q);
  }
  auto ratio_slot = [&](double q) {
    auto it = std::lower_bound(distinct.begin(), distinct.end(), q * (1.0 - 1e-9));
    return static_cast<std::size_t>(it - distinct.begin());
  };

  const double ceiling = detail::dimension_ceiling(ps.dim(), ps.metric());
  DimEstimate est;
  est.method = "adim-scan";
  est.window = std::to_string(pairs.size()) + " scale pairs, R/r in [" + format_real(distinct.front()) +
               ", " + format_real(distinct.back()) + "], " + std::to_string(centers.size()) +
               " centers";
  if (distinct.size() == 1) {
    std::vector<double> exps;
    for (const auto& s : samples) exps.push_back(s.exponent);
    est.value = detail::clamp_dimension(detail::upper_quantile(exps, params.quantile), ceiling);
    est.spread = *std::max_element(exps.begin(), exps.end()) - *std::min_element(exps.begin(), exps.end());
  } else {
    std::vector<std::vector<double>> grouped(distinct.size());
    for (const auto& s : samples) grouped[ratio_slot(s.R / s.r)].push_back(static_cast<double>(s.net));
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t g = 0; g < distinct.size(); ++g) {
      x.push_back(std::log(distinct[g]));
      y.push_back(std::log(detail::upper_quantile(grouped[g], params.quantile)));
    }
    est.value = detail::clamp_dimension(detail::least_squares_slope(x, y), ceiling);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t g = 1; g < x.size(); ++g) {
      const double s = (y[g] - y[g - 1]) / (x[g] - x[g - 1]);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    est.spread = hi - lo;
  }
  if (table) *table = std::move(samples);
  return est;
}

/// {((y - x)/t + 1)/2 : y in ps, |y - x| <= t}, the t-ball around x blown up
/// to [-1, 1]^n and moved into I^n.
inline PointSet localize(const PointSet& ps, std::span<const double> x, double t) {
  if (!(t > 0.0)) throw ArgumentError("localization scale must be positive");
  if (x.size() != ps.dim() || !ps.contains(x)) throw ArgumentError("localization center " + format_point(x) + " is not in the set");
  const double raw_t = ps.metric().raw_radius(t);
  const auto rows = detail::ball_rows(ps, x, raw_t);
  std::vector<double> coords;
  coords.reserve(rows.size());
  const std::size_t n = ps.dim();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double u = std::clamp((rows[i] - x[i % n]) / raw_t, -1.0, 1.0);
    coords.push_back((u + 1.0) / 2.0);
  }
  std::optional<int> trusted = ps.trusted_level();
  if (trusted) trusted = std::min(kMaxLevel, *trusted + 1 + static_cast<int>(std::floor(std::log2(raw_t))));
  return PointSet(n, std::move(coords), ps.metric(), trusted);
}

/// family_udim over the localized sets at every (center, scale). Members
/// whose trusted level is below the window top are left out.
inline DimEstimate adim_via_localization(const PointSet& ps, std::span<const std::size_t> centers,
                                         std::span<const double> scales, LevelWindow window) {
  if (ps.empty()) throw DomainError("localization family of an empty point set");
  if (centers.empty() || scales.empty()) throw ArgumentError("localization needs centers and scales");
  for (auto c : centers) {
    if (c >= ps.size()) throw ArgumentError("center index " + std::to_string(c) + " is out of range");
  }
  const std::size_t total = centers.size() * scales.size();
  std::vector<std::optional<ScalingCurve>> curves(total);
  parallel_for(total, [&](std::size_t i) {
    const auto local = localize(ps, ps[centers[i / scales.size()]], scales[i % scales.size()]);
    if (local.level_limit() >= window.k_max) curves[i] = boxcount_curve(local, window.k_min, window.k_max);
  });
  std::vector<ScalingCurve> members;
  for (auto& c : curves) {
    if (c) members.push_back(std::move(*c));
  }
  if (members.empty()) throw DomainError("no localized set is trustworthy up to level " + std::to_string(window.k_max));
  auto est = family_udim(members, window);
  est.method = "adim-localization";
  est.window = window.describe() + ", " + std::to_string(members.size()) + " localized sets";
  return est;
}

// ---------------------------------------------------------------------------
// Projection dimension, interior, tdim = 0

struct ProjDim {
  std::size_t value = 0;
  std::vector<std::size_t> selection;  ///< 0-based coordinates of the witnessing projection
};

namespace detail {

/// Advances a strictly increasing selection to the next one in lexicographic order.
inline bool next_combination(std::vector<std::size_t>& sel, std::size_t n) {
  const std::size_t m = sel.size();
  for (std::size_t i = m; i-- > 0;) {
    if (sel[i] < n - m + i) {
      ++sel[i];
      for (std::size_t j = i + 1; j < m; ++j) sel[j] = sel[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Largest m such that some m-coordinate projection has a level-j box with an
/// occupied fraction >= theta. Ties go to the lexicographically least selection.
inline ProjDim proj_dim(const DyadicCover& cover, double theta, int j) {
  if (j < 0 || j > cover.level()) throw ArgumentError("window level j must lie in [0, k]");
  if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("fullness threshold must lie in (0, 1]");
  const std::size_t n = cover.dim();
  for (std::size_t m = n; m >= 1; --m) {
    std::vector<std::size_t> sel(m);
    for (std::size_t i = 0; i < m; ++i) sel[i] = i;
    do {
      const auto image = m == n ? cover : project(cover, sel);
      if (has_full_box(image, j, theta)) return ProjDim{m, sel};
    } while (detail::next_combination(sel, n));
  }
  return ProjDim{};
}

enum class InteriorClass { interior, nowhere_dense, inconclusive };

inline const char* to_string(InteriorClass c) {
  switch (c) {
    case InteriorClass::interior: return "interior";
    case InteriorClass::nowhere_dense: return "nowhere_dense";
    case InteriorClass::inconclusive: return "inconclusive";
  }
  return "?";
}

/// interior: every cover has a level-j box filled to theta. nowhere_dense:
/// no cover has a completely filled level-j box (hence none at coarser levels).
inline InteriorClass classify_interior(std::span<const DyadicCover> covers, double theta, int j) {
  if (covers.size() < 2) throw ArgumentError("interior classification needs at least 2 levels");
  bool all_full = true;
  bool none_full = true;
  for (const auto& c : covers) {
    if (j > c.level()) throw ArgumentError("window level j exceeds cover level " + std::to_string(c.level()));
    all_full = all_full && has_full_box(c, j, theta);
    none_full = none_full && !has_full_box(c, j, 1.0);
  }
  if (all_full) return InteriorClass::interior;
  if (none_full) return InteriorClass::nowhere_dense;
  return InteriorClass::inconclusive;
}

struct TdimZeroResult {
  bool zero = false;
  std::vector<double> diameters;  ///< max component diameter per cover
};

/// Evidence for tdim = 0: the largest connected component keeps shrinking,
/// D_{i+1} <= shrink * D_i between consecutive covers. Never claims tdim > 0.
inline TdimZeroResult tdim_zero_test(std::span<const DyadicCover> covers, double shrink = 0.75) {
  if (covers.size() < 3) throw ArgumentError("tdim0 test needs at least 3 levels");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ArgumentError("shrink factor must lie in (0, 1)");
  for (std::size_t i = 1; i < covers.size(); ++i) {
    if (covers[i].level() <= covers[i - 1].level()) throw ArgumentError("tdim0 covers must have increasing levels");
  }
  TdimZeroResult out;
  out.diameters.resize(covers.size());
  parallel_for(covers.size(), [&](std::size_t i) { out.diameters[i] = max_component_diameter(covers[i]); });
  out.zero = true;
  for (std::size_t i = 1; i < covers.size(); ++i) {
    if (out.diameters[i] > shrink * out.diameters[i - 1]) out.zero = false;
  }
  return out;
}

}  // namespace metricdim
