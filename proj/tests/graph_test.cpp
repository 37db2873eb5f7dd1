#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "fiid/counting.hpp"
#include "fiid/graph.hpp"
#include "fiid/stats.hpp"
#include "support.hpp"

using namespace fiid;
using testing_support::chi_square_z;

TEST(ConfigModel, EveryVertexHasDegreeD) {
  for (int d : {1, 2, 3, 5}) {
    const std::size_t n = 40;
    const MultiGraph g = sample_config_model(n, d, 17);
    EXPECT_EQ(g.edges().size(), n * d / 2);
    for (Vertex v = 0; v < n; ++v) EXPECT_EQ(g.degree(v), static_cast<std::size_t>(d));
    EXPECT_EQ(g.regular_degree(), d);
    EXPECT_EQ(g.model(), GraphModel::config);
  }
}

TEST(ConfigModel, LoopsCountTwice) {
  const MultiGraph g(2, {{0, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(g.degree(0), 3u);
  EXPECT_EQ(g.degree(1), 3u);
  EXPECT_TRUE(g.has_loop_or_multi_edge());
}

TEST(ConfigModel, DetectsParallelEdges) {
  EXPECT_TRUE(MultiGraph(2, {{0, 1}, {1, 0}}).has_loop_or_multi_edge());
  EXPECT_FALSE(testing_support::cycle(5).has_loop_or_multi_edge());
}

TEST(ConfigModel, RejectsOddHalfEdgeCount) {
  EXPECT_THROW(sample_config_model(3, 3, 1), InputError);
  EXPECT_THROW(sample_config_model(0, 2, 1), InputError);
  EXPECT_THROW(sample_config_model(4, 0, 1), InputError);
}

TEST(ConfigModel, PairingIsAPerfectMatching) {
  const Pairing p = sample_pairing(10, 3, 5);
  std::vector<int> used(30, 0);
  for (const auto& [a, b] : p) {
    EXPECT_LT(a, b);
    ++used[a];
    ++used[b];
  }
  for (int u : used) EXPECT_EQ(u, 1);
}

TEST(ConfigModel, PairingsAreUniform) {
  // 8 half-edges have 7!! = 105 matchings; all should be equally likely.
  std::map<Pairing, double> count;
  for_each_pairing(4, 2, [&](const Pairing& p) { count[p] = 0.0; });
  ASSERT_EQ(count.size(), 105u);
  constexpr int kDraws = 105 * 400;
  for (int s = 0; s < kDraws; ++s) {
    const auto it = count.find(sample_pairing(4, 2, static_cast<Seed>(s)));
    ASSERT_NE(it, count.end());
    it->second += 1.0;
  }
  double chi2 = 0.0;
  for (const auto& [p, c] : count) chi2 += (c - 400.0) * (c - 400.0) / 400.0;
  EXPECT_LT(chi_square_z(chi2, 104), 4.0);
}

TEST(ConfigModel, SameSeedSameGraph) {
  const auto a = sample_config_model(30, 3, 99), b = sample_config_model(30, 3, 99);
  EXPECT_TRUE(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end()));
}

TEST(ConfigModel, LoopCountMatchesExpectation) {
  // Expected number of loops in the configuration model is (d-1)/2 as n grows;
  // exactly n * C(d,2) / (nd - 1).
  const std::size_t n = 50;
  const int d = 3;
  std::vector<double> loops;
  for (Seed s = 0; s < 4000; ++s) {
    const MultiGraph g = sample_config_model(n, d, s);
    double c = 0.0;
    for (const Edge& e : g.edges()) c += e.u == e.v;
    loops.push_back(c);
  }
  const auto est = estimate_mean(loops);
  EXPECT_TRUE(testing_support::within_sigma(est, n * 3.0 / (n * d - 1.0), 4.0)) << est.mean;
}

TEST(ErdosRenyi, SimpleWithExpectedEdgeCount) {
  const std::size_t n = 200;
  const double lambda = 3.0;
  std::vector<double> edges;
  for (Seed s = 0; s < 300; ++s) {
    const MultiGraph g = sample_er(n, lambda, s);
    EXPECT_FALSE(g.has_loop_or_multi_edge());
    edges.push_back(static_cast<double>(g.edges().size()));
  }
  const auto est = estimate_mean(edges);
  EXPECT_TRUE(testing_support::within_sigma(est, (n - 1) * lambda / 2.0, 4.0)) << est.mean;
}

TEST(ErdosRenyi, EachPairHasProbabilityLambdaOverN) {
  const std::size_t n = 8;
  const double lambda = 2.0;
  constexpr int kDraws = 20000;
  std::map<std::pair<Vertex, Vertex>, double> count;
  for (Seed s = 0; s < kDraws; ++s) {
    const MultiGraph g = sample_er(n, lambda, s);
    for (const Edge& e : g.edges()) count[{std::min(e.u, e.v), std::max(e.u, e.v)}] += 1.0;
  }
  const double p = lambda / n;
  double chi2 = 0.0;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b) {
      const double c = count[{a, b}];
      chi2 += (c - kDraws * p) * (c - kDraws * p) / (kDraws * p * (1 - p));
    }
  EXPECT_LT(chi_square_z(chi2, n * (n - 1) / 2), 4.0);
}

TEST(ErdosRenyi, Endpoints) {
  EXPECT_EQ(sample_er(10, 0.0, 1).edges().size(), 0u);
  EXPECT_EQ(sample_er(10, 10.0, 1).edges().size(), 45u);
  EXPECT_THROW(sample_er(10, 11.0, 1), InputError);
  EXPECT_THROW(sample_er(10, -1.0, 1), InputError);
}

TEST(GraphJson, RoundTrip) {
  const MultiGraph g = sample_config_model(12, 3, 4);
  const MultiGraph h = graph_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(h.size(), g.size());
  EXPECT_TRUE(std::equal(g.edges().begin(), g.edges().end(), h.edges().begin(), h.edges().end()));
  EXPECT_EQ(h.model(), GraphModel::config);
  EXPECT_EQ(h.regular_degree(), 3);
}

TEST(MultiGraph, RejectsOutOfRangeEndpoint) {
  EXPECT_THROW(MultiGraph(3, {{0, 3}}), InputError);
}
