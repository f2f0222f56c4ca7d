#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "metricdim/constructors.hpp"
#include "metricdim/partition.hpp"
#include "metricdim/random.hpp"
#include "metricdim/serialize.hpp"
#include "metricdim/sparse.hpp"
#include "oracles.hpp"

using namespace metricdim;

namespace {

DyadicCover lattice(int level, const std::vector<std::pair<Index, Index>>& pts) {
  std::vector<Index> flat;
  for (auto [a, b] : pts) {
    flat.push_back(a);
    flat.push_back(b);
  }
  return DyadicCover(level, 2, std::move(flat));
}

DyadicCover full_grid(int level, Index m) {
  std::vector<std::pair<Index, Index>> pts;
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) pts.emplace_back(a, b);
  }
  return lattice(level, pts);
}

std::vector<std::pair<long, long>> distinct_points(Rng& rng, std::size_t count, std::uint64_t side) {
  std::set<std::pair<long, long>> seen;
  while (seen.size() < count) {
    seen.emplace(static_cast<long>(uniform_below(rng, side)), static_cast<long>(uniform_below(rng, side)));
  }
  return {seen.begin(), seen.end()};
}

DyadicCover from_longs(int level, const std::vector<std::pair<long, long>>& pts) {
  std::vector<std::pair<Index, Index>> v;
  for (auto [a, b] : pts) v.emplace_back(a, b);
  return lattice(level, v);
}

DyadicCover cantor_square(int depth, int k) {
  const auto c = cantor(1.0 / 3.0, depth);
  return cover_points(product(c, c), k);
}

/// Cover of the graph of a step function with 8 equal steps on 16 columns.
DyadicCover step_graph(int k) {
  GraphTable t;
  for (int i = 0; i < 4096; ++i) {
    const double u = i / 4096.0;
    t.base.push_back(u);
    t.values.push_back(std::min(1.0, std::floor(8 * u) / 7));
  }
  return cover_points(graph_sample(t), k);
}

}  // namespace

TEST(DeltaSparse, Examples) {
  std::vector<std::pair<Index, Index>> row;
  for (Index i = 0; i < 10; ++i) row.emplace_back(i, 0);
  EXPECT_EQ(is_delta_sparse(lattice(4, row), 1), std::optional<std::size_t>(1));
  EXPECT_FALSE(is_delta_sparse(full_grid(3, 8), 7).has_value());

  std::vector<std::pair<Index, Index>> perm;
  for (Index i = 0; i < 16; ++i) perm.emplace_back(i, (5 * i + 3) % 16);
  EXPECT_EQ(is_delta_sparse(lattice(4, perm), 1), std::optional<std::size_t>(0));
}

TEST(DeltaSparse, OneDimensionalIsCardinality) {
  const DyadicCover c(4, 1, {1, 4, 9});
  EXPECT_EQ(is_delta_sparse(c, 3), std::optional<std::size_t>(0));
  EXPECT_FALSE(is_delta_sparse(c, 2).has_value());
}

TEST(CardBound, Examples) {
  std::vector<std::pair<Index, Index>> rows;
  for (Index i = 0; i < 10; ++i) rows.emplace_back(i, 0);
  EXPECT_TRUE(card_bound_check(lattice(4, rows), 1, 1));
  for (Index i = 0; i < 10; ++i) rows.emplace_back(i, 1);
  EXPECT_TRUE(card_bound_check(lattice(4, rows), 1, 2));
  EXPECT_THROW(card_bound_check(lattice(4, rows), 1, 1), ContractViolation);
}

TEST(CardBound, HoldsForEveryFoundWitness) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = distinct_points(rng, 1 + uniform_below(rng, 40), 12);
    const auto cover = from_longs(4, pts);
    const double delta = 1.0 + static_cast<double>(uniform_below(rng, 6));
    if (auto w = is_delta_sparse(cover, delta)) {
      EXPECT_TRUE(card_bound_check(cover, *w, delta));
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(SparseDecompose, FullGridHasNoSingleClass) {
  for (Index m = 2; m <= 6; ++m) {
    EXPECT_FALSE(sparse_decompose(full_grid(3, m), 1, static_cast<double>(m - 1), SearchMode::exact).has_value());
  }
}

TEST(SparseDecompose, RowPlusColumn) {
  std::vector<std::pair<Index, Index>> pts;
  for (Index i = 0; i < 8; ++i) pts.emplace_back(i, 3);
  for (Index i = 0; i < 8; ++i) {
    if (i != 3) pts.emplace_back(5, i);
  }
  const auto cover = lattice(3, pts);
  for (auto mode : {SearchMode::exact, SearchMode::greedy}) {
    const auto cert = sparse_decompose(cover, 2, 1, mode);
    ASSERT_TRUE(cert.has_value());
    EXPECT_TRUE(validate_certificate(cover, *cert).empty());
    std::vector<std::size_t> drops = cert->projections;
    std::sort(drops.begin(), drops.end());
    EXPECT_EQ(drops, (std::vector<std::size_t>{0, 1}));
  }
  EXPECT_FALSE(sparse_decompose(cover, 1, 1, SearchMode::exact).has_value());
}

TEST(SparseDecompose, ExactBudgetIsEnforced) {
  EXPECT_THROW(sparse_decompose(full_grid(4, 12), 3, 3, SearchMode::exact, 1000), BudgetError);
}

TEST(SparseDecompose, GreedyAgreesWithExhaustiveOracle) {
  Rng rng(12345);
  int agree = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = distinct_points(rng, 12, 6);
    const auto cover = from_longs(3, pts);
    const bool truth = oracle::sparse_partition_exists(pts, 2, 1);
    const auto exact = sparse_decompose(cover, 2, 1, SearchMode::exact);
    ASSERT_EQ(exact.has_value(), truth) << "trial " << trial;
    const auto greedy = sparse_decompose(cover, 2, 1, SearchMode::greedy);
    if (greedy) {
      EXPECT_TRUE(validate_certificate(cover, *greedy).empty());
    }
    agree += greedy.has_value() == truth;
  }
  EXPECT_GE(agree, 475);
  EXPECT_EQ(agree, 500);
}

TEST(SparseDecompose, ExactMatchesOracleForThreeClasses) {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pts = distinct_points(rng, 9, 4);
    const auto cover = from_longs(2, pts);
    EXPECT_EQ(sparse_decompose(cover, 3, 1, SearchMode::exact).has_value(), oracle::sparse_partition_exists(pts, 3, 1))
        << "trial " << trial;
  }
}

TEST(Certificates, MergeOfDisjointCoversIsValid) {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const auto left = distinct_points(rng, 10, 6);
    std::vector<std::pair<long, long>> right;
    for (auto [a, b] : distinct_points(rng, 10, 6)) right.emplace_back(a + 8, b);
    const auto ca = from_longs(4, left);
    const auto cb = from_longs(4, right);
    const auto a = sparse_decompose(ca, 2, 2, SearchMode::greedy);
    const auto b = sparse_decompose(cb, 2, 2, SearchMode::greedy);
    if (!a || !b) continue;
    std::vector<std::pair<long, long>> both = left;
    both.insert(both.end(), right.begin(), right.end());
    const auto merged = merge_certificates(*a, *b);
    EXPECT_EQ(merged.s(), 4u);
    EXPECT_TRUE(validate_certificate(from_longs(4, both), merged).empty());
  }
}

TEST(Certificates, LiftThroughProjection) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Index> flat;
    for (int i = 0; i < 30; ++i) {
      for (int c = 0; c < 3; ++c) flat.push_back(static_cast<Index>(uniform_below(rng, 8)));
    }
    const DyadicCover cover(3, 3, std::move(flat));
    const std::size_t first_two[2] = {0, 1};
    const auto shadow = project(cover, first_two);
    const auto cert = sparse_decompose(shadow, 2, 2, SearchMode::greedy);
    if (!cert) continue;
    SparseCertificate lifted{cover.level(), 3, {}, cert->projections, {}};
    for (std::size_t c = 0; c < cert->s(); ++c) {
      std::vector<Index> members;
      for (std::size_t i = 0; i < cover.size(); ++i) {
        const Index key[2] = {cover[i][0], cover[i][1]};
        if (cert->classes[c].contains(key)) members.insert(members.end(), cover[i].begin(), cover[i].end());
      }
      lifted.classes.emplace_back(cover.level(), 3, std::move(members));
      lifted.delta.push_back(cert->delta[c]);
    }
    EXPECT_TRUE(validate_certificate(cover, lifted).empty()) << "trial " << trial;
  }
}

TEST(Certificates, TamperingIsDetected) {
  const auto cover = cantor_square(6, 5);
  auto cert = sparse_decompose(cover, 2, 8, SearchMode::greedy);
  ASSERT_TRUE(cert.has_value());
  const auto j = certificate_to_json(*cert);
  const auto again = certificate_from_json(j);
  EXPECT_TRUE(validate_certificate(cover, again).empty());
  EXPECT_EQ(certificate_to_json(again), j);

  auto moved = j;
  auto& point = moved["classes"][0][0];
  point[0] = point[0].get<Index>() + 1;
  EXPECT_FALSE(validate_certificate(cover, certificate_from_json(moved)).empty());

  auto short_delta = j;
  short_delta["delta"] = Json::array({1});
  EXPECT_THROW(certificate_from_json(short_delta), ArgumentError);
}

TEST(Profile, SingletonsAndGraphsHaveZeroExponent) {
  const auto single = PointSet(2, {0.3, 0.7});
  std::vector<DyadicCover> covers;
  for (int k = 2; k <= 8; ++k) covers.push_back(cover_points(single, k));
  for (const auto& e : sparseness_profile(covers, 1).entries) EXPECT_EQ(e.eps, 0.0);

  // One cell per column: the lattice graph of u -> floor(2^k f(u 2^-k)).
  covers.clear();
  for (int k = 2; k <= 8; ++k) {
    std::vector<std::pair<Index, Index>> graph;
    for (Index u = 0; u < (Index{1} << k); ++u) {
      const double f = 0.5 + 0.4 * std::sin(9.0 * std::ldexp(static_cast<double>(u), -k));
      graph.emplace_back(u, static_cast<Index>(std::ldexp(f, k)));
    }
    covers.push_back(lattice(k, graph));
  }
  for (const auto& e : sparseness_profile(covers, 1).entries) EXPECT_EQ(e.eps, 0.0) << "k=" << e.level;
}

TEST(Profile, CantorSquareWithFourClasses) {
  const auto c = cantor(1.0 / 3.0, 10);
  const auto square = product(c, c);
  std::vector<DyadicCover> covers;
  for (int k = 4; k <= 10; ++k) covers.push_back(cover_points(square, k));
  const auto profile = sparseness_profile(covers, 4);
  ASSERT_EQ(profile.entries.size(), 7u);
  for (const auto& e : profile.entries) {
    EXPECT_GE(e.eps, 0.0);
    EXPECT_TRUE(sparse_decompose(covers[e.level - 4], 4, static_cast<double>(e.delta), SearchMode::greedy));
  }
  EXPECT_LE(profile.entries.back().eps, 0.75);
  // Frozen values; the exponent is not monotone over this range.
  EXPECT_NEAR(profile.entries.front().eps, 0.3962, 1e-4);
  EXPECT_NEAR(profile.entries.back().eps, 0.5285, 1e-4);
}

TEST(Profile, CantorSquareWithOneClassNeedsWholeFibers) {
  const auto c = cantor(1.0 / 3.0, 10);
  const auto square = product(c, c);
  std::vector<DyadicCover> covers;
  for (int k = 4; k <= 10; ++k) covers.push_back(cover_points(square, k));
  const auto profile = sparseness_profile(covers, 1);
  EXPECT_LT(profile.entries.back().eps, profile.entries.front().eps);
  // One class needs the full Cantor fiber count.
  for (const auto& e : profile.entries) EXPECT_EQ(e.delta, oracle::cantor_box_count(10, e.level));
}

TEST(Profile, IncreasingUnionMatchesLargestMember) {
  std::vector<DyadicCover> member;
  std::vector<DyadicCover> limit;
  for (int k = 3; k <= 7; ++k) {
    member.push_back(cantor_square(6, k));
    limit.push_back(cantor_square(9, k));
  }
  const auto a = sparseness_profile(member, 2);
  const auto b = sparseness_profile(limit, 2);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].delta, b.entries[i].delta);
}

TEST(PlanarClassifier, CantorSquareAtLevelEight) {
  const auto cover = cantor_square(10, 8);
  const auto cl = classify_planar_cover(cover, 2);
  EXPECT_EQ(cl.run_threshold, 64);
  EXPECT_TRUE(cl.classes[0].cells.empty());
  EXPECT_TRUE(cl.classes[1].cells.empty());
  std::size_t total = 0;
  std::set<std::pair<Index, Index>> seen;
  for (const auto& c : cl.classes) {
    total += c.cells.size();
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
      EXPECT_TRUE(cover.contains(c.cells[i]));
      seen.emplace(c.cells[i][0], c.cells[i][1]);
    }
    EXPECT_TRUE(c.sparse_witnessed());
  }
  EXPECT_EQ(total, cover.size());
  EXPECT_EQ(seen.size(), cover.size());
  EXPECT_EQ(cl.classes[2].cells.size(), 4260u);
  EXPECT_EQ(cl.classes[2].delta, 70u);
  EXPECT_EQ(cl.classes[3].cells.size(), 640u);
  EXPECT_EQ(cl.classes[3].delta, 16u);
  // Row fibers of C3 are bounded by the level-8 Cantor count.
  EXPECT_EQ(cl.classes[2].delta, oracle::cantor_box_count(10, 8));
}

TEST(PlanarClassifier, StepGraphJumpsAndSingletonRuns) {
  const auto cover = step_graph(4);
  const auto cl = classify_planar_cover(cover, 2);
  EXPECT_TRUE(cl.classes[0].cells.empty());
  EXPECT_TRUE(cl.classes[1].cells.empty());
  std::set<Index> c3_columns;
  for (std::size_t i = 0; i < cl.classes[2].cells.size(); ++i) c3_columns.insert(cl.classes[2].cells[i][0]);
  // Each jump sits between columns 2i+1 and 2i+2; both neighbours see it.
  EXPECT_EQ(c3_columns, (std::set<Index>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}));
  EXPECT_EQ(cl.classes[3].delta, 1u);
  EXPECT_EQ(cl.classes[2].delta, 2u);
}

TEST(PlanarClassifier, RejectsCoversWithInterior) {
  EXPECT_THROW(classify_planar_cover(full_grid(4, 16), 2), DomainError);
  EXPECT_THROW(classify_planar_cover(DyadicCover(4, 1, {1}), 2), ArgumentError);
}

TEST(UniformPartition, SingletonFibers) {
  std::vector<std::pair<Index, Index>> diagonal;
  for (Index u = 0; u < 32; ++u) diagonal.emplace_back(u, u);
  const auto found = uniform_partition_search(fibers(lattice(5, diagonal), 1), {4, std::nullopt, 2'000'000});
  ASSERT_TRUE(found.has_value());
  EXPECT_TRUE(found->minimal);
  EXPECT_EQ(found->parts, (std::vector<DyadicInterval>{{1, 0}, {2, 2}, {2, 3}}));
}

TEST(UniformPartition, CantorFibers) {
  const auto c = cantor(1.0 / 3.0, 8);
  const auto cover = cover_points(product(uniform_grid(16), c), 6);
  const auto found = uniform_partition_search(fibers(cover, 1), {3, std::nullopt, 2'000'000});
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->parts, (std::vector<DyadicInterval>{{1, 0}, {3, 4}, {3, 5}, {2, 3}}));
  // The part [1/2, 5/8] sits in the middle gap.
  EXPECT_GT(4.0 / 8, 1.0 / 3);
  EXPECT_LT(5.0 / 8, 2.0 / 3);
}

TEST(UniformPartition, SlidingHoleDependsOnResidueSemantics) {
  std::vector<std::pair<Index, Index>> pts;
  for (Index u = 0; u < 128; ++u) {
    for (Index v = 0; v < 128; ++v) {
      if (v != u) pts.emplace_back(u, v);
    }
  }
  const auto family = fibers(lattice(7, pts), 1);
  // Long runs keep only their end cells as residue.
  EXPECT_TRUE(uniform_partition_search(family, {7, std::nullopt, 2'000'000}).has_value());
  // With every cell treated as residue no part survives.
  EXPECT_FALSE(uniform_partition_search(family, {7, Index{1000}, 2'000'000}).has_value());
}

TEST(UniformPartition, FiberResidue) {
  const DyadicCover fiber(4, 1, {0, 1, 2, 3, 4, 7, 9, 10});
  EXPECT_EQ(fiber_residue(fiber, 3), (std::vector<Index>{0, 4, 7, 9, 10}));
  EXPECT_EQ(fiber_residue(fiber, 1), (std::vector<Index>{0, 4, 7, 9, 10}));
  EXPECT_EQ(fiber_residue(fiber, 6), (std::vector<Index>{0, 1, 2, 3, 4, 7, 9, 10}));
}
