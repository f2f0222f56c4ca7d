#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "metricdim/errors.hpp"
#include "metricdim/packing.hpp"
#include "metricdim/point_set.hpp"
#include "metricdim/random.hpp"

namespace metricdim {

namespace detail {

inline void require_line(const PointSet& a, const char* what) {
  if (a.dim() != 1) throw ArgumentError(std::string(what) + " takes a one-dimensional point set");
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// All x_i - x_j, deduplicated and sorted.
inline std::vector<double> difference_set(const PointSet& a) {
  std::vector<double> d;
  d.reserve(a.size() * a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) d.push_back(a[i][0] - a[j][0]);
  }
  return sorted_unique(std::move(d));
}

}  // namespace detail

struct QuotientParams {
  std::uint64_t cap = std::uint64_t{1} << 24;  ///< exact image while |D| * |D \ {0}| fits, else sample this many 4-tuples
  double window = 2.0;                          ///< keep values in [-window, window]
  std::uint64_t seed = 0;
};

/// Q(x1..x4) = (x1 - x2)/(x3 - x4), with Q = 0 when x3 = x4. The exact image
/// is enumerated through the difference set D as D / (D \ {0}) together with 0.
inline PointSet quotient_image(const PointSet& a, const QuotientParams& params = {}) {
  detail::require_line(a, "quotient_image");
  if (a.empty()) throw DomainError("quotient image of an empty set");
  std::vector<double> values{0.0};
  const auto d = detail::difference_set(a);
  std::vector<double> nonzero;
  for (double x : d) {
    if (x != 0.0) nonzero.push_back(x);
  }
  auto keep = [&](double q) {
    if (q >= -params.window && q <= params.window) values.push_back(q);
  };
  if (static_cast<double>(d.size()) * static_cast<double>(nonzero.size()) <= static_cast<double>(params.cap)) {
    for (double num : d) {
      for (double den : nonzero) keep(num / den);
    }
  } else {
    Rng rng(params.seed);
    const auto n = static_cast<std::uint64_t>(a.size());
    for (std::uint64_t t = 0; t < params.cap; ++t) {
      const double x1 = a[uniform_below(rng, n)][0];
      const double x2 = a[uniform_below(rng, n)][0];
      const double x3 = a[uniform_below(rng, n)][0];
      const double x4 = a[uniform_below(rng, n)][0];
      if (x3 != x4) keep((x1 - x2) / (x3 - x4));
    }
  }
  return PointSet(1, detail::sorted_unique(std::move(values)));
}

/// Every cell [lo + i eps, lo + (i + 1) eps) of the eps-grid on [lo, hi] holds
/// a point; the last cell is closed at hi.
inline bool eps_dense(const PointSet& ps, double lo, double hi, double eps) {
  detail::require_line(ps, "eps_dense");
  if (!(hi > lo)) throw ArgumentError("eps_dense needs hi > lo");
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / eps));
  std::vector<char> hit(cells, 0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double x = ps[i][0];
    if (x < lo || x > hi) continue;
    auto c = static_cast<std::size_t>(std::floor((x - lo) / eps));
    hit[std::min(c, cells - 1)] = 1;
  }
  return std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
}

/// An open double cone around axis_angle avoided by every nonzero difference
/// of a^2, and the resulting lower Lipschitz constants of
/// T(p) = -p_x sin(axis) + p_y cos(axis) on a^2.
struct ConeGap {
  double axis_angle = 0.0;
  double half_width = 0.0;
  double lower_constant = 0.0;            ///< sup-norm: |T(p) - T(q)| >= c |p - q|_inf
  double lower_constant_euclidean = 0.0;  ///< sin(half_width)

  [[nodiscard]] double apply(double x, double y) const { return -x * std::sin(axis_angle) + y * std::cos(axis_angle); }
};

struct ConeGapParams {
  double angular_resolution = 1e-3;
  std::uint64_t max_directions = std::uint64_t{1} << 25;
};

/// Shrink applied to the exhaustive sup-norm constant so the certificate
/// survives rounding in T(p) - T(q) versus T(p - q).
inline constexpr double kCertificateSlack = 1e-9;

inline std::optional<ConeGap> cone_gap(const PointSet& a, const ConeGapParams& params = {}) {
  detail::require_line(a, "cone_gap");
  if (a.size() < 2) throw DomainError("cone gap needs at least 2 points");
  const auto d = detail::difference_set(a);
  if (static_cast<double>(d.size()) * static_cast<double>(d.size()) > static_cast<double>(params.max_directions)) {
    throw BudgetError("cone gap would examine " + std::to_string(d.size() * d.size()) + " difference vectors");
  }
  std::vector<double> angles;
  angles.reserve(d.size() * d.size());
  for (double dx : d) {
    for (double dy : d) {
      if (dx == 0.0 && dy == 0.0) continue;
      double t = std::atan2(dy, dx);
      if (t < 0.0) t += std::numbers::pi;
      if (t >= std::numbers::pi) t -= std::numbers::pi;
      angles.push_back(t);
    }
  }
  angles = detail::sorted_unique(std::move(angles));
  double best = angles.front() + std::numbers::pi - angles.back();
  double start = angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) {
    // Gaps equal up to rounding go to the one nearest angle 0.
    const double width = angles[i] - angles[i - 1];
    const bool tie = std::abs(width - best) <= 1e-12 * best;
    if ((!tie && width > best) || (tie && angles[i - 1] < start)) {
      best = width;
      start = angles[i - 1];
    }
  }
  if (best <= params.angular_resolution) return std::nullopt;
  ConeGap gap;
  gap.axis_angle = std::fmod(start + best / 2.0, std::numbers::pi);
  gap.half_width = best / 2.0;
  gap.lower_constant_euclidean = std::sin(gap.half_width);
  double c = std::numeric_limits<double>::infinity();
  for (double dx : d) {
    for (double dy : d) {
      if (dx == 0.0 && dy == 0.0) continue;
      c = std::min(c, std::abs(gap.apply(dx, dy)) / std::max(std::abs(dx), std::abs(dy)));
    }
  }
  gap.lower_constant = c * (1.0 - kCertificateSlack);
  return gap;
}

/// Pairs (p, q) of a^2 with |T(p) - T(q)| < c |p - q|_inf.
inline std::uint64_t cone_gap_violations(const PointSet& a, const ConeGap& gap) {
  detail::require_line(a, "cone_gap_violations");
  std::vector<double> image;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      pts.emplace_back(a[i][0], a[j][0]);
      image.push_back(gap.apply(a[i][0], a[j][0]));
    }
  }
  std::uint64_t bad = 0;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    for (std::size_t q = p + 1; q < pts.size(); ++q) {
      const double dist = std::max(std::abs(pts[p].first - pts[q].first), std::abs(pts[p].second - pts[q].second));
      if (std::abs(image[p] - image[q]) < gap.lower_constant * dist) ++bad;
    }
  }
  return bad;
}

struct AmplifierCaps {
  QuotientParams quotient{};
  ConeGapParams cone{};
  std::size_t max_set = 64;  ///< larger iterates are cut to a seeded sample of this size
};

struct AmplifierIteration {
  std::size_t size = 0;
  double exponent = 0.0;        ///< net-count slope of the iterate
  double exponent_spread = 0.0;
  std::optional<ConeGap> gap;
  bool dense = false;
};

enum class AmplifierVerdict { dense, not_dense, inconclusive };

inline const char* to_string(AmplifierVerdict v) {
  switch (v) {
    case AmplifierVerdict::dense: return "dense";
    case AmplifierVerdict::not_dense: return "not_dense";
    case AmplifierVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct AmplifierTrace {
  std::vector<AmplifierIteration> iterations;
  AmplifierVerdict verdict = AmplifierVerdict::not_dense;
  std::uint64_t final_map_arity = 1;
  std::vector<PointSet> iterates;  ///< the set examined at each iteration
};

class AmplifierBudgetError : public BudgetError {
 public:
  AmplifierBudgetError(const std::string& what, AmplifierTrace partial)
      : BudgetError(what), partial_(std::move(partial)) {}
  [[nodiscard]] const AmplifierTrace& partial() const { return partial_; }

 private:
  AmplifierTrace partial_;
};

/// Least-squares slope of log2 net_r against -log2 r for r = 2^-1, 2^-2, ...
/// down to the smallest gap (at most 2^-20). Returns {slope, spread}.
inline std::pair<double, double> net_exponent(const PointSet& a) {
  if (a.size() < 2) return {0.0, 0.0};
  const double gap = min_separation(a);
  const int finest = std::clamp(static_cast<int>(std::floor(-std::log2(gap))), 2, 20);
  std::vector<double> x;
  std::vector<double> y;
  for (int m = 1; m <= finest; ++m) {
    x.push_back(m);
    y.push_back(std::log2(static_cast<double>(net_number(a, std::ldexp(1.0, -m)))));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / static_cast<double>(x.size());
    my += y[i] / static_cast<double>(x.size());
  }
  double sxy = 0.0;
  double sxx = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    if (i > 0) {
      lo = std::min(lo, y[i] - y[i - 1]);
      hi = std::max(hi, y[i] - y[i - 1]);
    }
  }
  return {sxy / sxx, hi - lo};
}

/// Rescales a one-dimensional set onto [0, 1] by a similarity.
inline PointSet renormalize(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double low = *lo;
  const double width = *hi - *lo;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(width == 0.0 ? 0.0 : std::clamp((v - low) / width, 0.0, 1.0));
  return PointSet(1, std::move(out));
}

/// Repeats: stop if Q(current^4) is eps-dense in [0, 1]; otherwise find a cone
/// gap (none: inconclusive) and replace current by T(current^2), rescaled
/// into I. After max_iters maps without density the verdict is not_dense.
inline AmplifierTrace amplify(const PointSet& a, double eps, int max_iters, const AmplifierCaps& caps = {}) {
  detail::require_line(a, "amplify");
  if (a.empty()) throw DomainError("amplify needs a nonempty set");
  if (max_iters < 0 || max_iters > 30) throw ArgumentError("max_iters must lie in [0, 30]");
  AmplifierTrace trace;
  PointSet current = a;
  for (int iter = 0;; ++iter) {
    AmplifierIteration step;
    step.size = current.size();
    std::tie(step.exponent, step.exponent_spread) = net_exponent(current);
    QuotientParams qp = caps.quotient;
    qp.seed = caps.quotient.seed + static_cast<std::uint64_t>(iter);
    step.dense = eps_dense(quotient_image(current, qp), 0.0, 1.0, eps);
    trace.iterates.push_back(current);
    if (step.dense) {
      trace.iterations.push_back(step);
      trace.verdict = AmplifierVerdict::dense;
      trace.final_map_arity = std::uint64_t{4} << iter;
      return trace;
    }
    if (iter == max_iters) {
      trace.iterations.push_back(step);
      trace.verdict = AmplifierVerdict::not_dense;
      trace.final_map_arity = std::uint64_t{1} << iter;
      return trace;
    }
    if (current.size() >= 2) {
      try {
        step.gap = cone_gap(current, caps.cone);
      } catch (const BudgetError& e) {
        trace.iterations.push_back(step);
        trace.final_map_arity = std::uint64_t{1} << iter;
        throw AmplifierBudgetError(e.what(), std::move(trace));
      }
    }
    trace.iterations.push_back(step);
    if (!step.gap) {
      trace.verdict = AmplifierVerdict::inconclusive;
      trace.final_map_arity = std::uint64_t{1} << iter;
      return trace;
    }
    std::vector<double> image;
    image.reserve(current.size() * current.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = 0; j < current.size(); ++j) image.push_back(step.gap->apply(current[i][0], current[j][0]));
    }
    PointSet next = renormalize(image);
    if (next.size() > caps.max_set) {
      Rng rng(caps.quotient.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iter + 1)));
      std::vector<std::size_t> pool(next.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      std::vector<double> kept;
      for (std::size_t i = 0; i < caps.max_set; ++i) {
        const auto pick = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[pick]);
        kept.push_back(next[pool[i]][0]);
      }
      next = PointSet(1, std::move(kept));
    }
    current = std::move(next);
  }
}

}  // namespace metricdim
