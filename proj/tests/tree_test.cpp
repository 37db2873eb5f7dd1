#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fiid/stats.hpp"
#include "fiid/tree.hpp"
#include "support.hpp"

using namespace fiid;

namespace {

std::size_t regular_tree_size(int d, int r) {
  std::size_t total = 1, layer = 1;
  for (int i = 1; i <= r; ++i) {
    layer *= static_cast<std::size_t>(i == 1 ? d : d - 1);
    total += layer;
  }
  return total;
}

}  // namespace

TEST(RegularTree, SizeAndDegrees) {
  for (int d : {2, 3, 4}) {
    for (int r : {0, 1, 2, 4}) {
      const TruncatedTree t = sample_regular_tree(d, r, 1);
      EXPECT_EQ(t.nb.size(), regular_tree_size(d, r));
      EXPECT_TRUE(t.nb.is_tree());
      for (LocalId v = 0; v < t.nb.size(); ++v) {
        if (t.nb.depth(v) < r) EXPECT_EQ(t.nb.degree(v), static_cast<std::size_t>(d));
        else EXPECT_EQ(t.nb.degree(v), r == 0 ? 0u : 1u);
        EXPECT_EQ(t.boundary[v] != 0, t.nb.depth(v) == r);
      }
    }
  }
}

TEST(RegularTree, KeysAreDistinct) {
  const TruncatedTree t = sample_regular_tree(3, 6, 2);
  std::set<std::uint64_t> keys(t.keys.begin(), t.keys.end());
  EXPECT_EQ(keys.size(), t.keys.size());
}

TEST(LazyTree, ExploresOnlyWhatIsRead) {
  LazyTree tree(TreeShape::regular(3), 10, 5, fresh_labels(5, 0));
  EXPECT_EQ(tree.generated(), 1u);
  EXPECT_EQ(tree.degree(0), 3u);
  const LocalId child = tree.neighbor(0, 1);
  EXPECT_EQ(tree.generated(), 4u);
  EXPECT_EQ(tree.parent(child), 0u);
  EXPECT_EQ(tree.neighbor(child, 0), 0u);
  EXPECT_EQ(tree.depth(child), 1);
}

TEST(LazyTree, MatchesMaterializedTree) {
  const TreeShape shape = TreeShape::pgw(3.0);
  LazyTree lazy(shape, 4, derive(9, Stream::tree), fresh_labels(9, 0));
  const TruncatedTree t = sample_pgw_tree(3.0, 4, 9);
  // Walk the lazy tree in BFS order and compare with the explicit copy.
  std::vector<LocalId> order{0};
  for (std::size_t h = 0; h < order.size(); ++h)
    for (std::size_t i = 0; i < lazy.degree(order[h]); ++i) {
      const LocalId w = lazy.neighbor(order[h], i);
      if (w != lazy.parent(order[h])) order.push_back(w);
    }
  ASSERT_EQ(order.size(), t.nb.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(lazy.key(order[i]), t.keys[i]);
    EXPECT_EQ(lazy.label(order[i]), t.nb.label(static_cast<LocalId>(i)));
  }
}

TEST(LazyTree, RelabelKeepsStructure) {
  LazyTree tree(TreeShape::pgw(2.0), 3, 77, fresh_labels(77, 0));
  tree.expand_all();
  const std::size_t n = tree.generated();
  std::vector<Label> before;
  for (LocalId v = 0; v < n; ++v) before.push_back(tree.label(v));
  tree.relabel(fresh_labels(77, 0, 1));
  EXPECT_EQ(tree.generated(), n);
  std::size_t same = 0;
  for (LocalId v = 0; v < n; ++v) {
    same += tree.label(v) == before[v];
    EXPECT_EQ(tree.label(v).origin, tree.key(v));
  }
  EXPECT_EQ(same, 0u);
}

TEST(PgwTree, OffspringArePoisson) {
  constexpr double lambda = 2.5;
  constexpr int kTrees = 20000;
  constexpr int kCells = 9;
  std::vector<double> count(kCells + 1, 0.0);
  for (int s = 0; s < kTrees; ++s) {
    LazyTree tree(TreeShape::pgw(lambda), 1, derive(3, Stream::tree, s), fresh_labels(3, s));
    count[std::min<std::uint32_t>(tree.offspring(0), kCells)] += 1.0;
  }
  double chi2 = 0.0, pmf = std::exp(-lambda), tail = 1.0;
  for (int j = 0; j <= kCells; ++j) {
    const double prob = j < kCells ? pmf : tail;
    chi2 += (count[j] - kTrees * prob) * (count[j] - kTrees * prob) / (kTrees * prob);
    tail -= pmf;
    pmf *= lambda / (j + 1);
  }
  EXPECT_LT(testing_support::chi_square_z(chi2, kCells), 4.0);
}

TEST(PgwTree, GenerationSizesHaveMeanLambdaToTheI) {
  constexpr double lambda = 1.5;
  std::vector<std::vector<double>> gen(4);
  for (Seed s = 0; s < 20000; ++s) {
    const TruncatedTree t = sample_pgw_tree(lambda, 3, s);
    std::vector<double> c(4, 0.0);
    for (LocalId v = 0; v < t.nb.size(); ++v) c[t.nb.depth(v)] += 1.0;
    for (int i = 0; i < 4; ++i) gen[i].push_back(c[i]);
  }
  for (int i = 0; i < 4; ++i) {
    const auto e = estimate_mean(gen[i]);
    EXPECT_TRUE(testing_support::within_sigma(e, std::pow(lambda, i), 4.0)) << i << " " << e.mean;
  }
}

TEST(TreeShape, RejectsBadParameters) {
  EXPECT_THROW(TreeShape::regular(1), InputError);
  EXPECT_THROW(TreeShape::pgw(0.0), InputError);
  EXPECT_THROW(TreeShape::pgw(1000.0), InputError);
}
