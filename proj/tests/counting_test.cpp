#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fiid/counting.hpp"
#include "support.hpp"

using namespace fiid;
using namespace testing_support;

namespace {

DensityProfile single_set(std::size_t n, std::size_t size) {
  return make_density_profile(1, {1.0, static_cast<double>(size) / static_cast<double>(n)});
}

// E[# independent m-sets] in G(n, p) by summing over all 2^{C(n,2)} graphs.
double er_expected_count_exhaustive(std::size_t n, double p, std::size_t m) {
  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << pairs.size()); ++mask) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (mask >> i & 1u) edges.push_back({pairs[i].first, pairs[i].second});
    const double weight = std::pow(p, static_cast<double>(edges.size())) *
                          std::pow(1 - p, static_cast<double>(pairs.size() - edges.size()));
    const MultiGraph g(n, edges);
    double count = 0.0;
    for (auto s : independent_sets(g)) count += std::popcount(s) == static_cast<int>(m);
    total += weight * count;
  }
  return total;
}

}  // namespace

TEST(Counting, DoubleFactorial) {
  double direct = 1.0;
  for (std::int64_t m = 2; m <= 20; m += 2) {
    direct *= static_cast<double>(m - 1);
    EXPECT_NEAR(std::exp(log_double_factorial_odd(m)), direct, 1e-9 * direct);
  }
  EXPECT_EQ(log_double_factorial_odd(0), 0.0);
  EXPECT_THROW(log_double_factorial_odd(3), InputError);
}

TEST(Counting, Multinomial) {
  const std::vector<std::int64_t> parts{2, 3, 1};
  EXPECT_NEAR(std::exp(log_multinomial(parts)), 60.0, 1e-9);
}

TEST(Counting, PairingEnumerationCount) {
  for (auto [n, d] : {std::pair<std::size_t, int>{2, 2}, {4, 2}, {4, 3}, {6, 2}, {2, 3}}) {
    std::uint64_t count = 0;
    for_each_pairing(n, d, [&](const Pairing&) { ++count; });
    EXPECT_NEAR(static_cast<double>(count), std::exp(log_double_factorial_odd(static_cast<std::int64_t>(n) * d)), 1e-6);
  }
}

TEST(Counting, SingleSetExpectationMatchesEnumeration) {
  for (auto [n, d] : {std::pair<std::size_t, int>{4, 2}, {4, 3}, {6, 2}, {6, 1}, {2, 3}}) {
    for (std::size_t size = 0; size <= n; ++size) {
      const DensityProfile rho = single_set(n, size);
      const double oracle = config_mean_Z(n, d, rho);
      const double formula = std::exp(log_expected_Z_total(rho, n, d));
      EXPECT_LE(std::abs(formula - oracle), 1e-9 * oracle) << n << " " << d << " " << size;
    }
  }
}

TEST(Counting, PairsOfSetsMatchEnumeration) {
  // Two sets in one configuration-model graph; cells of size 1 each, and
  // cells (2, 1, 1, 0) for a disjoint pair.
  const std::vector<DensityProfile> profiles{make_density_profile(2, {1.0, 0.5, 0.5, 0.25}),
                                             make_density_profile(2, {1.0, 0.25, 0.25, 0.0})};
  for (const auto& rho : profiles) {
    const double oracle = config_mean_Z(4, 2, rho);
    const double formula = std::exp(log_expected_Z_total(rho, 4, 2));
    EXPECT_NEAR(formula, oracle, 1e-9 * std::max(1.0, oracle));
  }
}

TEST(Counting, CompatibleEdgeCountsAreCompatible) {
  const DensityProfile rho = make_density_profile(2, {1.0, 0.5, 0.5, 0.25});
  const auto all = compatible_edge_counts(rho, 8, 3);
  ASSERT_FALSE(all.empty());
  const auto cells = cell_counts(rho_to_pi(rho), 8);
  for (const auto& m : all) EXPECT_NO_THROW(check_compatible(m, cells, 3));
}

TEST(Counting, IncompatibleEdgeCountsAreRejected) {
  const std::vector<std::int64_t> cells{2, 2};
  EdgeCounts m{1, {2, 2, 2, 2}};
  EXPECT_THROW(check_compatible(m, cells, 3), InputError);  // edges inside the set
  EdgeCounts lopsided{1, {4, 2, 2, 0}};
  EXPECT_THROW(check_compatible(lopsided, cells, 3), InputError);  // row sum of cell 1 is 2, not 6
  EdgeCounts good{1, {0, 6, 6, 0}};
  EXPECT_NO_THROW(check_compatible(good, cells, 3));
}

TEST(Counting, NonIntegralCellsAreRejected) {
  EXPECT_THROW(log_expected_Z_total(make_density_profile(1, {1.0, 0.3}), 4, 2), InputError);
}

TEST(Counting, IntersectingPairsFromCells) {
  Gen g(12);
  for (int rep = 0; rep < 500; ++rep) {
    const int k = g.between(1, 6);
    const std::size_t n = static_cast<std::size_t>(g.between(1, 40));
    std::vector<Subset> masks(n);
    std::vector<std::int64_t> cells(std::size_t{1} << k, 0);
    for (auto& m : masks) {
      m = static_cast<Subset>(g.below(std::size_t{1} << k));
      ++cells[m];
    }
    EXPECT_NEAR(intersecting_pairs_from_cells(cells), static_cast<double>(intersecting_pairs_direct(masks)), 1e-10);
  }
}

TEST(Counting, ErSingleSetFormulaIsExact) {
  for (std::size_t m : {1u, 2u, 3u}) {
    const double p = 0.3;
    const double exact = er_expected_count_exhaustive(5, p, m);
    const double formula = std::exp(er_log_expected_Z(single_set(5, m), 5, p * 5));
    EXPECT_NEAR(formula, exact, 1e-10) << m;
  }
}

TEST(Counting, BruteForceZWithTwoGraphs) {
  // Path 0-1-2 and its complement-ish edge {0,2}.
  const MultiGraph a(3, {{0, 1}, {1, 2}}), b(3, {{0, 2}});
  const std::vector<MultiGraph> gs{a, b};
  // Singletons in each, sharing the vertex: 3 pairs.
  EXPECT_EQ(brute_force_Z(gs, make_density_profile(2, {1.0, 1.0 / 3, 1.0 / 3, 1.0 / 3})), 3u);
  // Independent 2-sets: {0,2} in a; {0,1},{1,2} in b.
  EXPECT_EQ(brute_force_Z(a, single_set(3, 2)), 1u);
  EXPECT_EQ(brute_force_Z(b, single_set(3, 2)), 2u);
}

TEST(Counting, LoopedVertexIsNeverIndependent) {
  const MultiGraph g(2, {{0, 0}, {1, 1}, {0, 1}});
  EXPECT_EQ(brute_force_Z(g, single_set(2, 1)), 0u);
  EXPECT_EQ(brute_force_Z(g, single_set(2, 0)), 1u);
}
