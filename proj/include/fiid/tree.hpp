#pragma once

// Regular and Poisson Galton-Watson trees, generated on demand. A vertex is
// identified by a 64-bit key (hash of its parent's key and its child index),
// so structure and labels are pure functions of the seed and the vertex's
// position: expanding the tree in a different order gives the same tree.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/label.hpp"
#include "fiid/neighborhood.hpp"
#include "fiid/rng.hpp"

namespace fiid {

/// Offspring law of a rooted tree: T_d (root d children, others d-1) or a
/// Galton-Watson tree with Poisson(lambda) offspring at every vertex.
class TreeShape {
 public:
  enum class Kind { regular, pgw };

  static TreeShape regular(int d) {
    require(d >= 2, "regular tree needs d >= 2");
    TreeShape s;
    s.kind_ = Kind::regular;
    s.d_ = d;
    return s;
  }

  static TreeShape pgw(double lambda) {
    require(lambda > 0.0, "PGW tree needs lambda > 0");
    require(lambda <= PoissonTable::kMaxMean, "PGW mean too large");
    TreeShape s;
    s.kind_ = Kind::pgw;
    s.lambda_ = lambda;
    s.poisson_ = std::make_shared<const PoissonTable>(lambda);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  int d() const noexcept { return d_; }
  double lambda() const noexcept { return lambda_; }

  /// Offspring count of the vertex with this key.
  std::uint32_t children(std::uint64_t structure, std::uint64_t key, bool is_root) const {
    if (kind_ == Kind::regular) return static_cast<std::uint32_t>(is_root ? d_ : d_ - 1);
    const double u = unit_interval(derive(structure, Stream::tree, key));
    return static_cast<std::uint32_t>((*poisson_)(u));
  }

 private:
  Kind kind_ = Kind::regular;
  int d_ = 0;
  double lambda_ = 0.0;
  std::shared_ptr<const PoissonTable> poisson_;
};

inline constexpr std::uint64_t kRootKey = 0x5bd1e9955bd1e995ULL;

inline std::uint64_t child_key(std::uint64_t parent, std::uint32_t index) noexcept {
  return combine(parent, index + 1);
}

using KeyLabeler = std::function<Label(std::uint64_t key)>;

/// Labels i.i.d. per vertex key in labelling `copy` of `trial`.
inline KeyLabeler fresh_labels(Seed seed, std::uint64_t trial, std::uint64_t copy = 0) {
  return [=](std::uint64_t key) {
    return Label{derive(seed, Stream::labels, trial, copy, key), key};
  };
}

/// A rooted tree truncated at `radius`, materialised lazily as a factor
/// explores it. Vertices at depth `radius` are boundary: their offspring
/// are never generated. Local id 0 is the root.
class LazyTree final : public NeighborhoodView {
 public:
  LazyTree(TreeShape shape, int radius, std::uint64_t structure, KeyLabeler labels)
      : shape_(std::move(shape)), radius_(radius), structure_(structure),
        labeler_(std::move(labels)) {
    require(radius >= 0, "radius must be non-negative");
    add_vertex(kRootKey, kNoParent, 0);
  }

  LocalId root() const override { return 0; }
  int radius() const override { return radius_; }

  std::size_t degree(LocalId v) const override {
    const Node& n = nodes_[v];
    return (n.parent == kNoParent ? 0 : 1) + (n.depth < radius_ ? n.child_count : 0);
  }

  LocalId neighbor(LocalId v, std::size_t i) const override {
    if (nodes_[v].parent != kNoParent) {
      if (i == 0) return nodes_[v].parent;
      --i;
    }
    expand(v);
    return nodes_[v].first_child + static_cast<LocalId>(i);
  }

  Label label(LocalId v) const override { return labels_[v]; }
  int depth(LocalId v) const override { return nodes_[v].depth; }

  std::uint64_t key(LocalId v) const { return nodes_[v].key; }
  LocalId parent(LocalId v) const { return nodes_[v].parent; }
  /// Offspring count drawn for v, whether or not v is a boundary vertex.
  std::uint32_t offspring(LocalId v) const { return nodes_[v].child_count; }
  bool is_boundary(LocalId v) const { return nodes_[v].depth == radius_; }
  /// Number of vertices generated so far.
  std::size_t generated() const noexcept { return nodes_.size(); }

  /// Replaces the labelling of every generated and future vertex; the
  /// structure stays as generated.
  void relabel(KeyLabeler labels) {
    labeler_ = std::move(labels);
    for (std::size_t v = 0; v < nodes_.size(); ++v) labels_[v] = labeler_(nodes_[v].key);
  }

  /// Generates every vertex up to the radius.
  void expand_all() const {
    for (LocalId v = 0; v < nodes_.size(); ++v) expand(v);
  }

 private:
  static constexpr LocalId kNoParent = 0xffffffffu;
  static constexpr LocalId kUnexpanded = 0xffffffffu;

  struct Node {
    std::uint64_t key;
    LocalId parent;
    int depth;
    std::uint32_t child_count;
    LocalId first_child;
  };

  void add_vertex(std::uint64_t key, LocalId parent, int depth) const {
    const std::uint32_t count = shape_.children(structure_, key, parent == kNoParent);
    nodes_.push_back({key, parent, depth, count, kUnexpanded});
    labels_.push_back(labeler_(key));
  }

  void expand(LocalId v) const {
    if (nodes_[v].first_child != kUnexpanded || nodes_[v].depth >= radius_) return;
    const auto first = static_cast<LocalId>(nodes_.size());
    const std::uint64_t key = nodes_[v].key;
    const int depth = nodes_[v].depth + 1;
    const std::uint32_t count = nodes_[v].child_count;
    for (std::uint32_t i = 0; i < count; ++i) add_vertex(child_key(key, i), v, depth);
    nodes_[v].first_child = first;
  }

  TreeShape shape_;
  int radius_;
  std::uint64_t structure_;
  KeyLabeler labeler_;
  mutable std::vector<Node> nodes_;
  mutable std::vector<Label> labels_;
};

/// A fully generated truncated tree.
struct TruncatedTree {
  RootedNeighborhood nb;
  /// Offspring generated for each vertex (0 for boundary vertices).
  std::vector<std::uint32_t> child_count;
  /// Depth-radius vertices whose offspring were not generated.
  std::vector<char> boundary;
  /// Position key of each vertex, shared with LazyTree.
  std::vector<std::uint64_t> keys;
};

/// Copies a lazy tree, fully expanded, into explicit form. Ids follow
/// generation order, which is BFS order for a tree nothing has explored yet.
inline TruncatedTree materialize(const LazyTree& lazy) {
  lazy.expand_all();
  const std::size_t n = lazy.generated();
  TruncatedTree t;
  std::vector<Edge> edges;
  std::vector<Label> labels;
  edges.reserve(n ? n - 1 : 0);
  labels.reserve(n);
  t.child_count.reserve(n);
  t.boundary.reserve(n);
  t.keys.reserve(n);
  for (LocalId v = 0; v < n; ++v) {
    if (v != 0) edges.push_back({lazy.parent(v), v});
    labels.push_back(lazy.label(v));
    t.boundary.push_back(lazy.is_boundary(v) ? 1 : 0);
    t.child_count.push_back(lazy.is_boundary(v) ? 0 : lazy.offspring(v));
    t.keys.push_back(lazy.key(v));
  }
  t.nb = RootedNeighborhood(n, edges, 0, std::move(labels), lazy.radius());
  return t;
}

inline TruncatedTree sample_tree(const TreeShape& shape, int r, Seed seed) {
  LazyTree lazy(shape, r, derive(seed, Stream::tree), fresh_labels(seed, 0));
  return materialize(lazy);
}

/// T_{d,r} with fresh labels.
inline TruncatedTree sample_regular_tree(int d, int r, Seed seed) {
  return sample_tree(TreeShape::regular(d), r, seed);
}

/// PGW(lambda) truncated at depth r with fresh labels.
inline TruncatedTree sample_pgw_tree(double lambda, int r, Seed seed) {
  return sample_tree(TreeShape::pgw(lambda), r, seed);
}

}  // namespace fiid
