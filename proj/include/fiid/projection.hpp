#pragma once

// Running a factor on finite graphs and on random trees.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/factor.hpp"
#include "fiid/graph.hpp"
#include "fiid/label.hpp"
#include "fiid/neighborhood.hpp"
#include "fiid/parallel.hpp"
#include "fiid/stats.hpp"
#include "fiid/tree.hpp"

namespace fiid {

/// Membership bits of a vertex set in a host graph.
struct IndependentSetSample {
  const MultiGraph* graph = nullptr;
  std::vector<char> member;

  std::size_t size() const {
    return static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
  }
  double density() const {
    return member.empty() ? 0.0 : static_cast<double>(size()) / static_cast<double>(member.size());
  }
  std::vector<Vertex> members() const {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < member.size(); ++v)
      if (member[v]) out.push_back(v);
    return out;
  }
};

/// Number of edges (loops included) with both endpoints marked.
inline std::size_t count_violations(const MultiGraph& g, const std::vector<char>& member) {
  require(member.size() == g.size(), "membership size mismatch");
  std::size_t bad = 0;
  for (const Edge& e : g.edges())
    if (member[e.u] && member[e.v]) ++bad;
  return bad;
}

inline bool verify_independence(const IndependentSetSample& s) {
  return s.graph != nullptr && count_violations(*s.graph, s.member) == 0;
}

/// Labels of vertices 0..n-1 in labelling `copy` of `trial`.
inline std::vector<Label> draw_labels(std::size_t n, Seed seed, std::uint64_t trial,
                                      std::uint64_t copy = 0) {
  std::vector<Label> labels(n);
  for (Vertex v = 0; v < n; ++v) labels[v] = draw_label(seed, trial, copy, v);
  return labels;
}

/// I_G(v) = f(N_r(g, v)) when the (r+1)-neighbourhood of v is a tree, else 0.
/// Throws NumericalError if the result is not independent, which would mean
/// the factor does not produce independent sets on trees.
inline IndependentSetSample project_to_graph(const Factor& f, const MultiGraph& g,
                                             std::span<const Label> labels, unsigned workers = 1) {
  require(labels.size() == g.size(), "labelling must cover the graph");
  IndependentSetSample out{&g, std::vector<char>(g.size(), 0)};
  // Few enough blocks that each one's O(n) scratch stays cheap.
  const std::size_t block = std::max<std::size_t>(256, g.size() / 64 + 1);
  const std::size_t blocks = (g.size() + block - 1) / block;
  parallel_for(blocks, workers, [&](std::size_t b) {
    BallScratch scratch(g.size());
    const std::size_t end = std::min(g.size(), (b + 1) * block);
    for (std::size_t v = b * block; v < end; ++v) {
      const auto vv = static_cast<Vertex>(v);
      if (!ball_is_tree(g, vv, f.radius() + 1, scratch)) continue;
      const RootedNeighborhood nb = neighborhood(g, vv, f.radius(), labels, scratch);
      out.member[v] = f.rule(nb) ? 1 : 0;
    }
  });
  if (count_violations(g, out.member) != 0)
    throw NumericalError("projected set is not independent");
  return out;
}

/// Root bit of f on the tree of trial `trial`: structure from
/// (seed, tree stream, trial), labels from labelling 0 of that trial.
inline bool tree_trial(const Factor& f, const TreeShape& shape, Seed seed, std::uint64_t trial) {
  LazyTree tree(shape, f.radius(), derive(seed, Stream::tree, trial), fresh_labels(seed, trial));
  return f.rule(tree);
}

/// P[f(root) = 1] on T_d or PGW(lambda) by Monte Carlo over fresh trees.
inline MeanEstimate estimate_tree_density(const Factor& f, const TreeShape& shape,
                                          std::uint64_t trials, Seed seed, unsigned workers = 1) {
  require(trials >= 1, "need at least one trial");
  std::vector<char> hit(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) { hit[t] = tree_trial(f, shape, seed, t); });
  std::uint64_t successes = 0;
  for (char h : hit) successes += static_cast<std::uint64_t>(h);
  return estimate_proportion(successes, trials);
}

}  // namespace fiid
