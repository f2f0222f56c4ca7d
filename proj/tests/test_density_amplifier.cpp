#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "metricdim/amplifier.hpp"
#include "metricdim/constructors.hpp"
#include "oracles.hpp"

using namespace metricdim;

namespace {

std::vector<double> values(const PointSet& ps) { return {ps.coords().begin(), ps.coords().end()}; }

bool has_value(const PointSet& ps, double x) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (std::abs(ps[i][0] - x) <= 1e-12) return true;
  }
  return false;
}

PointSet square(const PointSet& a) { return product(a, a); }

PointSet image_of_square(const PointSet& a, const ConeGap& gap) {
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) out.push_back(gap.apply(a[i][0], a[j][0]));
  }
  return PointSet(1, std::move(out));
}

}  // namespace

TEST(QuotientImage, Examples) {
  EXPECT_EQ(values(quotient_image(PointSet(1, {0.0, 1.0}))), (std::vector<double>{-1.0, 0.0, 1.0}));
  const auto q = quotient_image(PointSet(1, {0.0, 1.0, 3.0}));
  for (double x : {1.0 / 3, 2.0 / 3, 1.5, 2.0}) {
    EXPECT_TRUE(has_value(q, x)) << x;
    EXPECT_TRUE(has_value(q, -x)) << -x;
  }
  // 3 lies outside the default window [-2, 2].
  EXPECT_FALSE(has_value(q, 3.0));
  QuotientParams wide;
  wide.window = 4.0;
  EXPECT_TRUE(has_value(quotient_image(PointSet(1, {0.0, 1.0, 3.0}), wide), 3.0));
  EXPECT_THROW(quotient_image(PointSet(1, std::vector<double>{})), DomainError);
  EXPECT_THROW(quotient_image(PointSet(2, {0.0, 1.0})), ArgumentError);
}

TEST(QuotientImage, BruteForceOverAllTuples) {
  const PointSet a(1, {0.0, 1.0, 3.0});
  std::set<double> brute;
  for (int i = 0; i < 81; ++i) {
    const double x1 = a[i % 3][0];
    const double x2 = a[i / 3 % 3][0];
    const double x3 = a[i / 9 % 3][0];
    const double x4 = a[i / 27][0];
    const double q = x3 == x4 ? 0.0 : (x1 - x2) / (x3 - x4);
    if (std::abs(q) <= 2.0) brute.insert(q);
  }
  EXPECT_EQ(values(quotient_image(a)), std::vector<double>(brute.begin(), brute.end()));
}

TEST(QuotientImage, CantorIsDenseAtLevelFive) {
  ASSERT_TRUE(oracle::integer_quotient_dense(oracle::cantor_numerators(6), 5));
  EXPECT_TRUE(eps_dense(quotient_image(cantor(1.0 / 3.0, 6)), 0.0, 1.0, 1.0 / 32));
}

TEST(QuotientImage, SampledImageIsSeededAndInsideExactImage) {
  const auto a = reciprocals(40);
  QuotientParams sampled;
  sampled.cap = 5000;
  sampled.seed = 3;
  const auto s1 = quotient_image(a, sampled);
  const auto s2 = quotient_image(a, sampled);
  EXPECT_EQ(values(s1), values(s2));
  const auto exact = quotient_image(a);
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_TRUE(exact.contains(s1[i]));
}

TEST(EpsDense, Examples) {
  std::vector<double> half;
  for (int i = 0; i <= 32; ++i) half.push_back(i / 32.0);
  EXPECT_TRUE(eps_dense(PointSet(1, half), 0.0, 1.0, 1.0 / 16));
  EXPECT_FALSE(eps_dense(PointSet(1, {0.0, 1.0}), 0.0, 1.0, 0.25));
  EXPECT_TRUE(eps_dense(PointSet(1, {0.1, 0.4, 0.6, 1.0}), 0.0, 1.0, 0.25));
  EXPECT_THROW(eps_dense(PointSet(1, {0.0}), 1.0, 0.0, 0.1), ArgumentError);
  EXPECT_THROW(eps_dense(PointSet(1, {0.0}), 0.0, 1.0, 0.0), ArgumentError);
}

TEST(ConeGap, TwoPoints) {
  const auto gap = cone_gap(PointSet(1, {0.0, 1.0}));
  ASSERT_TRUE(gap.has_value());
  EXPECT_NEAR(gap->half_width, std::numbers::pi / 8, 1e-12);
  EXPECT_NEAR(gap->axis_angle, std::numbers::pi / 8, 1e-12);
  EXPECT_NEAR(gap->lower_constant_euclidean, std::sin(std::numbers::pi / 8), 1e-12);
  EXPECT_EQ(cone_gap_violations(PointSet(1, {0.0, 1.0}), *gap), 0u);
  EXPECT_THROW(cone_gap(PointSet(1, {0.5})), DomainError);
}

TEST(ConeGap, ArithmeticTripleCertificateHolds) {
  const PointSet a(1, {0.0, 1.0, 2.0});
  const auto gap = cone_gap(a);
  ASSERT_TRUE(gap.has_value());
  EXPECT_GT(gap->lower_constant, 0.0);
  EXPECT_EQ(cone_gap_violations(a, *gap), 0u);
}

TEST(ConeGap, AbsentBelowResolution) {
  ConeGapParams coarse;
  coarse.angular_resolution = 0.5;
  EXPECT_FALSE(cone_gap(reciprocals(30), coarse).has_value());
}

TEST(ConeGap, CertificatesHoldOnSeededSets) {
  Rng rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 6; ++i) v.push_back(uniform_unit(rng));
    const PointSet a(1, v);
    if (auto gap = cone_gap(a)) {
      EXPECT_EQ(cone_gap_violations(a, *gap), 0u) << "trial " << trial;
    }
  }
}

TEST(ConeGap, ProjectionPreservesPacking) {
  for (const auto& a : {PointSet(1, {0.0, 1.0, 3.0}), cantor(1.0 / 3.0, 1), reciprocals(5)}) {
    const auto gap = cone_gap(a);
    ASSERT_TRUE(gap.has_value());
    const auto image = image_of_square(a, *gap);
    const auto sq = square(a);
    for (int m = 0; m <= 8; ++m) {
      const double r = std::ldexp(1.0, -m);
      EXPECT_GE(net_number(image, r), net_number(sq, r / gap->lower_constant)) << "r=" << r;
    }
  }
}

TEST(ConeGap, BudgetIsEnforced) {
  ConeGapParams tiny;
  tiny.max_directions = 100;
  EXPECT_THROW(cone_gap(reciprocals(30), tiny), BudgetError);
}

TEST(Amplify, CantorIsDenseImmediately) {
  const auto trace = amplify(cantor(1.0 / 3.0, 6), 1.0 / 32, 5);
  EXPECT_EQ(trace.verdict, AmplifierVerdict::dense);
  ASSERT_EQ(trace.iterations.size(), 1u);
  EXPECT_EQ(trace.final_map_arity, 4u);
}

TEST(Amplify, ReciprocalsDenseWithinTwoIterations) {
  const auto trace = amplify(reciprocals(200), 1.0 / 16, 5);
  EXPECT_EQ(trace.verdict, AmplifierVerdict::dense);
  EXPECT_LE(trace.iterations.size(), 3u);
  EXPECT_EQ(trace.final_map_arity, std::uint64_t{4} << (trace.iterations.size() - 1));
}

TEST(Amplify, TwoPointsFirstMapGivesFourSpreadPoints) {
  const auto stopped = amplify(PointSet(1, {0.0, 1.0}), 0.25, 0);
  EXPECT_EQ(stopped.verdict, AmplifierVerdict::not_dense);
  EXPECT_EQ(stopped.final_map_arity, 1u);

  const auto trace = amplify(PointSet(1, {0.0, 1.0}), 0.25, 5);
  ASSERT_GE(trace.iterates.size(), 2u);
  const auto& next = trace.iterates[1];
  ASSERT_EQ(next.size(), 4u);
  const double s = std::sin(std::numbers::pi / 8);
  const double c = std::cos(std::numbers::pi / 8);
  EXPECT_NEAR(next[0][0], 0.0, 1e-12);
  EXPECT_NEAR(next[1][0], s / (s + c), 1e-12);
  EXPECT_NEAR(next[2][0], c / (s + c), 1e-12);
  EXPECT_NEAR(next[3][0], 1.0, 1e-12);
  // Q of those four points already meets every quarter of [0, 1].
  EXPECT_EQ(trace.verdict, AmplifierVerdict::dense);
  EXPECT_EQ(trace.iterations.size(), 2u);
}

TEST(Amplify, ExponentDoesNotDropBeyondSpread) {
  AmplifierCaps caps;
  caps.max_set = 400;
  const auto trace = amplify(reciprocals(12), 1.0 / 4096, 2, caps);
  ASSERT_GE(trace.iterations.size(), 2u);
  for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
    EXPECT_GE(trace.iterations[i].exponent,
              trace.iterations[i - 1].exponent - trace.iterations[i - 1].exponent_spread - 1e-12);
  }
}

TEST(Amplify, DeterministicAcrossRuns) {
  AmplifierCaps caps;
  caps.quotient.cap = 20000;
  caps.quotient.seed = 11;
  caps.max_set = 24;
  const auto a = amplify(reciprocals(60), 1.0 / 2048, 3, caps);
  const auto b = amplify(reciprocals(60), 1.0 / 2048, 3, caps);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t i = 0; i < a.iterates.size(); ++i) EXPECT_EQ(values(a.iterates[i]), values(b.iterates[i]));
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_EQ(a.final_map_arity, b.final_map_arity);
}

TEST(Amplify, BudgetErrorCarriesPartialTrace) {
  AmplifierCaps caps;
  caps.cone.max_directions = 10;
  try {
    amplify(reciprocals(20), 1.0 / 4096, 3, caps);
    FAIL() << "expected a budget error";
  } catch (const AmplifierBudgetError& e) {
    EXPECT_EQ(e.partial().iterations.size(), 1u);
  }
  EXPECT_THROW(amplify(PointSet(1, {0.0}), 0.1, 31), ArgumentError);
}
