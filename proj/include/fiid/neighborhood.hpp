#pragma once

// Rooted labelled neighbourhoods: the input object of every factor.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/graph.hpp"
#include "fiid/label.hpp"
#include "json.hpp"

namespace fiid {

using LocalId = std::uint32_t;

/// Read access to a rooted, labelled, locally finite graph. Implementations
/// may materialise vertices on demand, so only index-based access is offered.
class NeighborhoodView {
 public:
  virtual ~NeighborhoodView() = default;

  virtual LocalId root() const = 0;
  /// Every vertex the view can expose is within this distance of the root.
  virtual int radius() const = 0;
  /// Number of incidences at v (a loop counts twice).
  virtual std::size_t degree(LocalId v) const = 0;
  virtual LocalId neighbor(LocalId v, std::size_t i) const = 0;
  virtual Label label(LocalId v) const = 0;
  virtual int depth(LocalId v) const = 0;
};

/// Finite rooted neighbourhood stored in compressed adjacency form.
class RootedNeighborhood final : public NeighborhoodView {
 public:
  RootedNeighborhood() = default;

  /// Builds from an edge list on local ids 0..n-1. Depths are computed by
  /// BFS; the graph must be connected and lie within `radius` of `root`.
  RootedNeighborhood(std::size_t n, std::span<const Edge> edges, LocalId root,
                     std::vector<Label> labels, int radius)
      : root_(root), radius_(radius), labels_(std::move(labels)) {
    require(root < n, "root out of range");
    require(labels_.size() == n, "one label per vertex required");
    require(radius >= 0, "radius must be non-negative");
    edges_.assign(edges.begin(), edges.end());
    build_adjacency(n);
    depth_.assign(n, -1);
    std::deque<LocalId> queue{root};
    depth_[root] = 0;
    while (!queue.empty()) {
      const LocalId u = queue.front();
      queue.pop_front();
      for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
        const LocalId w = adjacency_[i];
        if (depth_[w] < 0) {
          depth_[w] = depth_[u] + 1;
          queue.push_back(w);
        }
      }
    }
    for (int dep : depth_) {
      require(dep >= 0, "neighbourhood must be connected");
      require(dep <= radius, "vertex beyond neighbourhood radius");
    }
  }

  LocalId root() const override { return root_; }
  int radius() const override { return radius_; }
  std::size_t degree(LocalId v) const override { return offsets_[v + 1] - offsets_[v]; }
  LocalId neighbor(LocalId v, std::size_t i) const override { return adjacency_[offsets_[v] + i]; }
  Label label(LocalId v) const override { return labels_[v]; }
  int depth(LocalId v) const override { return depth_[v]; }

  std::size_t size() const noexcept { return labels_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Label> labels() const noexcept { return labels_; }

  bool is_tree() const { return edges_.size() + 1 == size(); }

  /// Same structure, different labels (one per local vertex).
  RootedNeighborhood with_labels(std::vector<Label> labels) const {
    require(labels.size() == size(), "one label per vertex required");
    RootedNeighborhood copy = *this;
    copy.labels_ = std::move(labels);
    return copy;
  }

  /// Copy with local ids renumbered so that `order[new] = old`.
  RootedNeighborhood permuted(std::span<const LocalId> order) const {
    require(order.size() == size(), "permutation size mismatch");
    std::vector<LocalId> position(size());
    for (LocalId i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const Edge& e : edges_) edges.push_back({position[e.u], position[e.v]});
    std::vector<Label> labels(size());
    for (LocalId i = 0; i < order.size(); ++i) labels[i] = labels_[order[i]];
    return RootedNeighborhood(size(), edges, position[root_], std::move(labels), radius_);
  }

  /// Vertices ordered by BFS from the root, neighbours visited in order of
  /// label origin (host vertex id); root becomes local id 0.
  RootedNeighborhood canonical() const {
    std::vector<LocalId> order;
    order.reserve(size());
    std::vector<char> seen(size(), 0);
    order.push_back(root_);
    seen[root_] = 1;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const LocalId u = order[head];
      std::vector<LocalId> next;
      for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i)
        if (!seen[adjacency_[i]]) {
          seen[adjacency_[i]] = 1;
          next.push_back(adjacency_[i]);
        }
      std::sort(next.begin(), next.end(), [&](LocalId a, LocalId b) {
        return labels_[a].origin < labels_[b].origin;
      });
      order.insert(order.end(), next.begin(), next.end());
    }
    return permuted(order);
  }

  /// Induced sub-neighbourhood on vertices at depth <= r.
  RootedNeighborhood truncated(int r) const {
    require(r >= 0, "radius must be non-negative");
    if (r >= radius_) return *this;
    std::vector<LocalId> keep(size(), std::numeric_limits<LocalId>::max());
    std::vector<Label> labels;
    for (LocalId v = 0; v < size(); ++v)
      if (depth_[v] <= r) {
        keep[v] = static_cast<LocalId>(labels.size());
        labels.push_back(labels_[v]);
      }
    std::vector<Edge> edges;
    for (const Edge& e : edges_)
      if (depth_[e.u] <= r && depth_[e.v] <= r) edges.push_back({keep[e.u], keep[e.v]});
    const std::size_t n = labels.size();
    return RootedNeighborhood(n, edges, keep[root_], std::move(labels), r);
  }

 private:
  void build_adjacency(std::size_t n) {
    offsets_.assign(n + 1, 0);
    for (const Edge& e : edges_) {
      require(e.u < n && e.v < n, "edge endpoint out of range");
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_.back());
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges_) {
      adjacency_[fill[e.u]++] = e.v;
      adjacency_[fill[e.v]++] = e.u;
    }
    for (std::size_t v = 0; v < n; ++v)
      std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
  }

  LocalId root_ = 0;
  int radius_ = 0;
  std::vector<Label> labels_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<LocalId> adjacency_;
  std::vector<int> depth_;
};

/// Reusable BFS state for repeated ball queries on one host graph.
class BallScratch {
 public:
  explicit BallScratch(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n) {
    stamp_.assign(n, 0);
    local_.assign(n, 0);
    depth_.assign(n, 0);
    parent_edge_.assign(n, 0);
    current_ = 0;
  }

  std::size_t capacity() const noexcept { return stamp_.size(); }

 private:
  friend bool ball_is_tree(const MultiGraph&, Vertex, int, BallScratch&);
  friend RootedNeighborhood neighborhood(const MultiGraph&, Vertex, int, std::span<const Label>,
                                         BallScratch&);

  std::uint32_t next_stamp() {
    if (++current_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      current_ = 1;
    }
    return current_;
  }

  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> local_;
  std::vector<int> depth_;
  std::vector<std::uint32_t> parent_edge_;
  std::vector<Vertex> order_;
  std::uint32_t current_ = 0;
};

/// True when the subgraph induced on the radius-r ball around v is a tree
/// (no loop, parallel edge, or cycle). Stops at the first closing edge.
inline bool ball_is_tree(const MultiGraph& g, Vertex v, int r, BallScratch& s) {
  if (s.capacity() != g.size()) s.reset(g.size());
  const std::uint32_t mark = s.next_stamp();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  s.order_.clear();
  s.order_.push_back(v);
  s.stamp_[v] = mark;
  s.depth_[v] = 0;
  s.parent_edge_[v] = kNone;
  for (std::size_t head = 0; head < s.order_.size(); ++head) {
    const Vertex u = s.order_[head];
    for (const auto& inc : g.incident(u)) {
      if (inc.edge == s.parent_edge_[u]) continue;
      if (s.stamp_[inc.neighbor] == mark) return false;
      if (s.depth_[u] < r) {
        s.stamp_[inc.neighbor] = mark;
        s.depth_[inc.neighbor] = s.depth_[u] + 1;
        s.parent_edge_[inc.neighbor] = inc.edge;
        s.order_.push_back(inc.neighbor);
      }
    }
  }
  return true;
}

inline bool ball_is_tree(const MultiGraph& g, Vertex v, int r) {
  BallScratch s(g.size());
  return ball_is_tree(g, v, r, s);
}

/// N_r(g, v): induced subgraph on the radius-r ball, ids in BFS order with
/// neighbours taken in increasing host id; labels restricted from `labels`.
inline RootedNeighborhood neighborhood(const MultiGraph& g, Vertex v, int r,
                                       std::span<const Label> labels, BallScratch& s) {
  require(v < g.size(), "vertex not in graph");
  require(r >= 0, "radius must be non-negative");
  require(labels.size() == g.size(), "labelling must cover the graph");
  if (s.capacity() != g.size()) s.reset(g.size());
  const std::uint32_t mark = s.next_stamp();
  s.order_.clear();
  s.order_.push_back(v);
  s.stamp_[v] = mark;
  s.depth_[v] = 0;
  s.local_[v] = 0;
  for (std::size_t head = 0; head < s.order_.size(); ++head) {
    const Vertex u = s.order_[head];
    if (s.depth_[u] == r) continue;
    for (const auto& inc : g.incident(u)) {
      if (s.stamp_[inc.neighbor] == mark) continue;
      s.stamp_[inc.neighbor] = mark;
      s.depth_[inc.neighbor] = s.depth_[u] + 1;
      s.local_[inc.neighbor] = static_cast<std::uint32_t>(s.order_.size());
      s.order_.push_back(inc.neighbor);
    }
  }
  std::vector<Edge> edges;
  std::vector<Label> local_labels;
  local_labels.reserve(s.order_.size());
  for (const Vertex u : s.order_) {
    local_labels.push_back(labels[u]);
    for (const auto& inc : g.incident(u)) {
      if (s.stamp_[inc.neighbor] != mark) continue;
      // Each edge once: from its smaller local endpoint; loops appear twice
      // in the incidence list, so keep one copy of each.
      const LocalId a = s.local_[u], b = s.local_[inc.neighbor];
      if (a < b) edges.push_back({a, b});
      else if (a == b) edges.push_back({a, a});
    }
  }
  // Loops were pushed twice (two incidences); drop every second copy.
  std::vector<Edge> deduped;
  deduped.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    deduped.push_back(edges[i]);
    if (edges[i].u == edges[i].v) ++i;
  }
  return RootedNeighborhood(s.order_.size(), deduped, 0, std::move(local_labels), r);
}

inline RootedNeighborhood neighborhood(const MultiGraph& g, Vertex v, int r,
                                       std::span<const Label> labels) {
  BallScratch s(g.size());
  return neighborhood(g, v, r, labels, s);
}

/// B(G): number of vertices whose (r+1)-neighbourhood is not a tree.
inline std::size_t count_non_tree_vertices(const MultiGraph& g, int r) {
  require(r >= 0, "radius must be non-negative");
  BallScratch s(g.size());
  std::size_t count = 0;
  for (Vertex v = 0; v < g.size(); ++v)
    if (!ball_is_tree(g, v, r + 1, s)) ++count;
  return count;
}

inline nlohmann::json to_json(const RootedNeighborhood& nb) {
  nlohmann::json vertices = nlohmann::json::array();
  for (LocalId v = 0; v < nb.size(); ++v)
    vertices.push_back({{"id", v}, {"depth", nb.depth(v)}, {"origin", nb.label(v).origin},
                        {"label", nb.label(v).bits}});
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : nb.edges()) edges.push_back({e.u, e.v});
  return {{"root", nb.root()}, {"radius", nb.radius()}, {"vertices", std::move(vertices)},
          {"edges", std::move(edges)}};
}

}  // namespace fiid
