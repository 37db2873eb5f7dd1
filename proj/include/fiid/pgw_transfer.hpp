#pragma once

// Moving a factor for T_d onto Poisson Galton-Watson trees:
//   1. removal: a vertex of degree D > d marks the edges to its D - d
//      neighbours with the highest labels X; marked edges are deleted;
//   2. filling: each vertex of the resulting forest gets d - degree pendant
//      (d-1)-ary trees, and everything is relabelled with fresh labels Y;
//   3. inclusion: run the factor on the filled d-regular forest and keep
//      the vertices that lost no edge in stage 1.
// All three stages are evaluated lazily around the vertices a factor reads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/factor.hpp"
#include "fiid/label.hpp"
#include "fiid/neighborhood.hpp"
#include "fiid/parallel.hpp"
#include "fiid/projection.hpp"
#include "fiid/rng.hpp"
#include "fiid/stats.hpp"
#include "fiid/tree.hpp"

namespace fiid {

/// A forest with stable per-vertex keys, queried by vertex index.
class ForestSource {
 public:
  virtual ~ForestSource() = default;
  virtual std::size_t forest_degree(std::uint32_t v) const = 0;
  virtual std::uint32_t forest_neighbor(std::uint32_t v, std::size_t i) const = 0;
  virtual std::uint64_t key(std::uint32_t v) const = 0;
};

/// A forest given by an explicit edge list.
class ExplicitForest final : public ForestSource {
 public:
  ExplicitForest(std::size_t n, const std::vector<Edge>& edges, std::vector<std::uint64_t> keys)
      : keys_(std::move(keys)), adjacency_(n) {
    require(keys_.size() == n, "one key per forest vertex");
    for (const Edge& e : edges) {
      require(e.u < n && e.v < n && e.u != e.v, "bad forest edge");
      adjacency_[e.u].push_back(e.v);
      adjacency_[e.v].push_back(e.u);
    }
    require(edges.size() + components(n) == n, "forest must be acyclic");
  }

  std::size_t forest_degree(std::uint32_t v) const override { return adjacency_[v].size(); }
  std::uint32_t forest_neighbor(std::uint32_t v, std::size_t i) const override { return adjacency_[v][i]; }
  std::uint64_t key(std::uint32_t v) const override { return keys_[v]; }

 private:
  std::size_t components(std::size_t n) const {
    std::vector<char> seen(n, 0);
    std::size_t count = 0;
    for (std::uint32_t s = 0; s < n; ++s) {
      if (seen[s]) continue;
      ++count;
      std::vector<std::uint32_t> stack{s};
      seen[s] = 1;
      while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (auto w : adjacency_[u])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
    }
    return count;
  }

  std::vector<std::uint64_t> keys_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
};

/// Edge removal on a lazily generated tree whose labels are X. Marking by u
/// needs the labels of all of u's neighbours, so u must lie strictly inside
/// the tree's radius.
class LazyRemovalForest final : public ForestSource {
 public:
  LazyRemovalForest(const LazyTree& tree, int d) : tree_(tree), d_(d) {
    require(d >= 1, "degree cap must be positive");
  }

  /// Degree in the untruncated tree.
  std::size_t original_degree(LocalId v) const {
    return tree_.offspring(v) + (v == tree_.root() ? 0 : 1);
  }

  /// Whether u marks its edge to neighbour w.
  bool marks(LocalId u, LocalId w) const {
    const std::size_t deg = original_degree(u);
    if (deg <= static_cast<std::size_t>(d_)) return false;
    if (tree_.is_boundary(u)) throw NumericalError("removal window too small for the factor radius");
    return !(tree_.label(w) < threshold(u, deg));
  }

  bool edge_removed(LocalId parent, LocalId child) const {
    return marks(parent, child) || marks(child, parent);
  }

  /// Whether any edge at v was removed.
  bool lost_edge(LocalId v) const { return forest_degree(v) != original_degree(v); }

  std::size_t forest_degree(std::uint32_t v) const override { return neighbors(v).size(); }
  std::uint32_t forest_neighbor(std::uint32_t v, std::size_t i) const override { return neighbors(v)[i]; }
  std::uint64_t key(std::uint32_t v) const override { return tree_.key(v); }

  const LazyTree& tree() const { return tree_; }

 private:
  // Smallest label among the deg - d highest labels of u's neighbours.
  Label threshold(LocalId u, std::size_t deg) const {
    if (u >= thresholds_.size()) thresholds_.resize(tree_.generated());
    if (!thresholds_[u]) {
      std::vector<Label> labels;
      labels.reserve(deg);
      for (std::size_t i = 0; i < tree_.degree(u); ++i) labels.push_back(tree_.label(tree_.neighbor(u, i)));
      const std::size_t marked = deg - static_cast<std::size_t>(d_);
      std::nth_element(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(marked - 1), labels.end(),
                       [](const Label& a, const Label& b) { return b < a; });
      if (u >= thresholds_.size()) thresholds_.resize(tree_.generated());
      thresholds_[u] = labels[marked - 1];
    }
    return *thresholds_[u];
  }

  const std::vector<std::uint32_t>& neighbors(LocalId v) const {
    if (v >= surviving_.size()) surviving_.resize(std::max<std::size_t>(v + 1, tree_.generated()));
    if (!surviving_[v]) {
      if (tree_.is_boundary(v) && tree_.offspring(v) > 0)
        throw NumericalError("removal window too small for the factor radius");
      std::vector<std::uint32_t> out;
      for (std::size_t i = 0; i < tree_.degree(v); ++i) {
        const LocalId w = tree_.neighbor(v, i);
        const bool removed = tree_.parent(v) == w ? edge_removed(w, v) : edge_removed(v, w);
        if (!removed) out.push_back(w);
      }
      if (v >= surviving_.size()) surviving_.resize(tree_.generated());
      surviving_[v] = std::move(out);
    }
    return *surviving_[v];
  }

  const LazyTree& tree_;
  int d_;
  mutable std::vector<std::optional<Label>> thresholds_;
  mutable std::vector<std::optional<std::vector<std::uint32_t>>> surviving_;
};

/// Key of the root of pendant tree `slot` attached at a forest vertex.
inline std::uint64_t pendant_key(std::uint64_t forest_key, std::uint32_t slot) noexcept {
  return combine(combine(forest_key, 0x70656e64616e74ULL), slot);
}

/// The filled d-regular forest around one forest vertex, truncated at
/// `radius`, with labels Y drawn from `y_seed` by vertex key. Vertices
/// are created as the factor reads them.
class FilledView final : public NeighborhoodView {
 public:
  FilledView(const ForestSource& forest, std::uint32_t root, int d, int radius, Seed y_seed)
      : forest_(forest), d_(d), radius_(radius), y_seed_(y_seed) {
    require(d >= 2, "filling needs d >= 2");
    require(radius >= 0, "radius must be non-negative");
    nodes_.push_back({false, root, forest.key(root), kNone, 0, false, {}});
  }

  LocalId root() const override { return 0; }
  int radius() const override { return radius_; }

  std::size_t degree(LocalId v) const override {
    if (nodes_[v].depth >= radius_) return nodes_[v].parent == kNone ? 0 : 1;
    return static_cast<std::size_t>(d_);
  }

  LocalId neighbor(LocalId v, std::size_t i) const override {
    if (nodes_[v].depth >= radius_) return nodes_[v].parent;
    expand(v);
    return nodes_[v].nbrs[i];
  }

  Label label(LocalId v) const override {
    return Label{derive(y_seed_, Stream::filling, nodes_[v].key), nodes_[v].key};
  }
  int depth(LocalId v) const override { return nodes_[v].depth; }

  bool is_pendant(LocalId v) const { return nodes_[v].pendant; }

 private:
  static constexpr LocalId kNone = 0xffffffffu;

  struct Node {
    bool pendant;
    std::uint32_t forest_id;
    std::uint64_t key;
    LocalId parent;
    int depth;
    bool expanded;
    std::vector<LocalId> nbrs;
  };

  LocalId add(bool pendant, std::uint32_t forest_id, std::uint64_t key, LocalId parent) const {
    nodes_.push_back({pendant, forest_id, key, parent, nodes_[parent].depth + 1, false, {}});
    return static_cast<LocalId>(nodes_.size() - 1);
  }

  void expand(LocalId v) const {
    if (nodes_[v].expanded) return;
    std::vector<LocalId> nbrs;
    nbrs.reserve(static_cast<std::size_t>(d_));
    const LocalId parent = nodes_[v].parent;
    const std::uint64_t key = nodes_[v].key;
    if (nodes_[v].pendant) {
      nbrs.push_back(parent);
      for (std::uint32_t i = 0; i + 1 < static_cast<std::uint32_t>(d_); ++i)
        nbrs.push_back(add(true, 0, child_key(key, i), v));
    } else {
      const std::uint32_t f = nodes_[v].forest_id;
      const std::size_t fd = forest_.forest_degree(f);
      if (fd > static_cast<std::size_t>(d_)) throw NumericalError("forest degree exceeds d after removal");
      const bool parent_in_forest = parent != kNone && !nodes_[parent].pendant;
      for (std::size_t i = 0; i < fd; ++i) {
        const std::uint32_t w = forest_.forest_neighbor(f, i);
        if (parent_in_forest && nodes_[parent].forest_id == w) nbrs.push_back(parent);
        else nbrs.push_back(add(false, w, forest_.key(w), v));
      }
      for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(d_ - static_cast<int>(fd)); ++s)
        nbrs.push_back(add(true, 0, pendant_key(key, s), v));
    }
    nodes_[v].nbrs = std::move(nbrs);
    nodes_[v].expanded = true;
  }

  const ForestSource& forest_;
  int d_;
  int radius_;
  Seed y_seed_;
  mutable std::vector<Node> nodes_;
};

/// Explicit copy of a loop-free view out to `radius`, ids in BFS order.
inline RootedNeighborhood materialize_view(const NeighborhoodView& view, int radius) {
  std::vector<LocalId> order{view.root()};
  std::vector<std::uint32_t> local;  // view id -> new id + 1
  auto id_of = [&](LocalId v) -> std::uint32_t& {
    if (v >= local.size()) local.resize(v + 1, 0);
    return local[v];
  };
  id_of(view.root()) = 1;
  std::vector<Edge> edges;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const LocalId u = order[head];
    if (view.depth(u) > radius) continue;
    for (std::size_t i = 0; i < view.degree(u); ++i) {
      const LocalId w = view.neighbor(u, i);
      if (view.depth(w) > radius) continue;
      if (id_of(w) == 0) {
        order.push_back(w);
        id_of(w) = static_cast<std::uint32_t>(order.size());
      }
      const std::uint32_t a = id_of(u) - 1, b = id_of(w) - 1;
      if (a == b) throw InputError("materialize_view does not support loops");
      if (a < b) edges.push_back({a, b});
    }
  }
  std::vector<Label> labels;
  for (LocalId v : order) labels.push_back(view.label(v));
  return RootedNeighborhood(order.size(), edges, 0, std::move(labels), radius);
}

/// Explicit removal stage on a fully generated tree with labels X = t.nb
/// labels. Edge e is removed when marked by an endpoint; it is undetermined
/// when it is unmarked so far but touches a boundary vertex whose full
/// neighbourhood is unknown.
struct RemovalStage {
  std::vector<char> removed;     // per edge of t.nb.edges()
  std::vector<char> determined;  // per edge
  std::vector<Edge> forest_edges;  // determined surviving edges
};

inline RemovalStage edge_removal_stage(const TruncatedTree& t, int d) {
  require(d >= 1, "degree cap must be positive");
  const RootedNeighborhood& nb = t.nb;
  const std::size_t n = nb.size();
  require(t.boundary.size() == n, "boundary flags must cover the tree");
  require(nb.is_tree(), "removal stage needs a tree");
  // Marking thresholds for every vertex whose whole neighbourhood is known.
  std::vector<std::optional<Label>> threshold(n);
  std::vector<char> marks_nothing(n, 0);
  for (LocalId u = 0; u < n; ++u) {
    if (t.boundary[u]) continue;
    const std::size_t deg = nb.degree(u);
    if (deg <= static_cast<std::size_t>(d)) {
      marks_nothing[u] = 1;
      continue;
    }
    std::vector<Label> labels;
    for (std::size_t i = 0; i < deg; ++i) labels.push_back(nb.label(nb.neighbor(u, i)));
    std::sort(labels.begin(), labels.end(), [](const Label& a, const Label& b) { return b < a; });
    threshold[u] = labels[deg - static_cast<std::size_t>(d) - 1];
  }
  auto marks = [&](LocalId u, LocalId w) -> std::optional<bool> {
    if (marks_nothing[u]) return false;
    if (!threshold[u]) return std::nullopt;
    return !(nb.label(w) < *threshold[u]);
  };
  RemovalStage out;
  for (const Edge& e : nb.edges()) {
    const auto a = marks(e.u, e.v), b = marks(e.v, e.u);
    const bool removed = (a && *a) || (b && *b);
    const bool known = removed || (a && b);
    out.removed.push_back(removed ? 1 : 0);
    out.determined.push_back(known ? 1 : 0);
    if (known && !removed) out.forest_edges.push_back(e);
  }
  return out;
}

/// J at the view root: the factor's bit on the filled forest, cleared when
/// the root lost an edge in the removal stage.
inline bool inclusion_stage(const Factor& f, const NeighborhoodView& filled, bool root_lost_edge) {
  return !root_lost_edge && apply_factor(f, filled);
}

struct TransferTrial {
  bool j = false;        // root in J
  bool i_prime = false;  // root in I' (factor on the filled forest)
  bool event_e = false;  // root and its neighbours have degree <= d
};

/// Radius of PGW tree needed to evaluate J at vertices up to depth `depth`.
inline int transfer_tree_radius(const Factor& f, int depth = 0) {
  return depth + std::max(f.radius(), 1) + 1;
}

inline bool event_E(const LazyTree& tree, int d) {
  const auto cap = static_cast<std::uint32_t>(d);
  if (tree.offspring(0) > cap) return false;
  for (std::size_t i = 0; i < tree.degree(0); ++i)
    if (tree.offspring(tree.neighbor(0, i)) + 1 > cap) return false;
  return true;
}

/// Labels X of trial t's PGW tree; Y comes from the filling stream.
inline TransferTrial transfer_trial(const Factor& f, const TreeShape& pgw, int d, Seed seed, std::uint64_t t) {
  LazyTree tree(pgw, transfer_tree_radius(f), derive(seed, Stream::tree, t), fresh_labels(seed, t));
  LazyRemovalForest forest(tree, d);
  FilledView filled(forest, tree.root(), d, f.radius(), derive(seed, Stream::filling, t));
  TransferTrial out;
  out.i_prime = apply_factor(f, filled);
  out.j = out.i_prime && !forest.lost_edge(tree.root());
  out.event_e = event_E(tree, d);
  return out;
}

/// Checks one trial's J on the root and its children: returns the number of
/// original tree edges root-child with both ends in J (always 0 for a
/// correct construction), and throws if the degree cap fails.
inline std::size_t transfer_window_violations(const Factor& f, const TreeShape& pgw, int d, Seed seed,
                                              std::uint64_t t) {
  LazyTree tree(pgw, transfer_tree_radius(f, 1), derive(seed, Stream::tree, t), fresh_labels(seed, t));
  LazyRemovalForest forest(tree, d);
  const Seed y = derive(seed, Stream::filling, t);
  auto j_at = [&](LocalId v) {
    if (forest.forest_degree(v) > static_cast<std::size_t>(d))
      throw NumericalError("forest degree exceeds d after removal");
    FilledView filled(forest, v, d, f.radius(), y);
    return inclusion_stage(f, filled, forest.lost_edge(v));
  };
  if (!j_at(tree.root())) return 0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < tree.degree(0); ++i)
    if (j_at(tree.neighbor(0, i))) ++bad;
  return bad;
}

/// Materialised record of one trial, for inspection and tests.
struct TransferTrace {
  TruncatedTree original;
  RemovalStage removal;
  RootedNeighborhood filled;
  bool i_prime = false;
  bool j = false;
};

inline TransferTrace trace_transfer(const Factor& f, double lambda, int d, Seed seed, std::uint64_t t) {
  const TreeShape pgw = TreeShape::pgw(lambda);
  TransferTrace trace;
  {
    LazyTree tree(pgw, transfer_tree_radius(f), derive(seed, Stream::tree, t), fresh_labels(seed, t));
    trace.original = materialize(tree);
  }
  trace.removal = edge_removal_stage(trace.original, d);
  LazyTree tree(pgw, transfer_tree_radius(f), derive(seed, Stream::tree, t), fresh_labels(seed, t));
  LazyRemovalForest forest(tree, d);
  FilledView filled(forest, tree.root(), d, f.radius(), derive(seed, Stream::filling, t));
  trace.filled = materialize_view(filled, f.radius());
  trace.i_prime = f.rule(trace.filled);
  trace.j = trace.i_prime && !forest.lost_edge(tree.root());
  return trace;
}

// --- Poisson quantities -------------------------------------------------

inline double poisson_log_pmf(double lambda, std::uint64_t j) {
  const double x = static_cast<double>(j);
  return -lambda + x * std::log(lambda) - std::lgamma(x + 1.0);
}

/// P(Poisson(lambda) <= m) by direct summation.
inline double poisson_cdf(double lambda, std::uint64_t m) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= m; ++j) s += std::exp(poisson_log_pmf(lambda, j));
  return std::min(1.0, s);
}

/// p(lambda, m) = P(Poisson(lambda) > m), summed over the upper tail.
inline double poisson_tail(double lambda, std::uint64_t m) {
  require(lambda > 0.0, "Poisson mean must be positive");
  double s = 0.0;
  for (std::uint64_t j = m + 1;; ++j) {
    const double term = std::exp(poisson_log_pmf(lambda, j));
    s += term;
    if (static_cast<double>(j) > lambda && term < 1e-18 * s) break;
    if (term == 0.0 && static_cast<double>(j) > lambda) break;
  }
  return std::min(1.0, s);
}

/// e^{d - lambda} (lambda/d)^d, a bound on P(Poisson(lambda) > d) for lambda < d.
inline double poisson_tail_bound(double lambda, double d) {
  require(lambda > 0.0, "Poisson mean must be positive");
  require(lambda < d, "tail bound needs lambda < d");
  return std::exp(d - lambda + d * std::log(lambda / d));
}

/// e^{-d^{2u-1}/2}, the tail bound along lambda = d - d^u.
inline double schedule_tail_bound(double d, double u) {
  require(u > 0.5 && u < 1.0, "schedule exponent u must lie in (1/2, 1)");
  require(d > 0.0, "d must be positive");
  return std::exp(-0.5 * std::pow(d, 2.0 * u - 1.0));
}

/// Smallest integer d with d >= lambda + lambda^u.
inline int schedule_degree(double lambda, double u) {
  require(u > 0.5 && u < 1.0, "schedule exponent u must lie in (1/2, 1)");
  require(lambda > 0.0, "lambda must be positive");
  return static_cast<int>(std::ceil(lambda + std::pow(lambda, u)));
}

/// P(E(lambda, d)) = sum_{j<=d} P(X = j) F(d-1)^j with F the Poisson CDF.
inline double event_E_exact(double lambda, int d) {
  require(lambda > 0.0, "lambda must be positive");
  require(d >= 1, "d must be positive");
  const double f = poisson_cdf(lambda, static_cast<std::uint64_t>(d - 1));
  double s = 0.0;
  for (int j = 0; j <= d; ++j) s += std::exp(poisson_log_pmf(lambda, static_cast<std::uint64_t>(j)) + j * std::log(f));
  return s;
}

/// e^{-lambda p} - p with p = P(Poisson(lambda) > d - 1): lower bound on P(E).
inline double event_E_lower_bound(double lambda, int d) {
  const double p = poisson_tail(lambda, static_cast<std::uint64_t>(d - 1));
  return std::exp(-lambda * p) - p;
}

/// Monte Carlo P(E) over PGW trees with structure from (seed, tree stream, t).
inline MeanEstimate event_E_mc(double lambda, int d, std::uint64_t trials, Seed seed, unsigned workers = 1) {
  require(trials >= 1, "need at least one trial");
  const TreeShape pgw = TreeShape::pgw(lambda);
  std::vector<char> hit(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    LazyTree tree(pgw, 1, derive(seed, Stream::tree, t), fresh_labels(seed, t));
    hit[t] = event_E(tree, d);
  });
  std::uint64_t s = 0;
  for (char h : hit) s += static_cast<std::uint64_t>(h);
  return estimate_proportion(s, trials);
}

struct TransferReport {
  double lambda = 0.0;
  int d = 0;
  std::uint64_t trials = 0;
  MeanEstimate density_j;
  /// Density of the factor on T_d, estimated independently.
  MeanEstimate density_i;
  /// P(E) over the transfer trials' trees.
  MeanEstimate event_e_mc;
  double event_e_exact = 0.0;
  double lower = 0.0;  // density_i * P(E) exact
  double upper = 0.0;  // density_i
  bool sandwich_holds = false;
};

inline TransferReport transfer_density(const Factor& f, double lambda, int d, std::uint64_t trials, Seed seed,
                                       unsigned workers = 1) {
  require(trials >= 1, "need at least one trial");
  require(d >= 2, "transfer needs d >= 2");
  const TreeShape pgw = TreeShape::pgw(lambda);
  std::vector<TransferTrial> out(trials);
  parallel_for(trials, workers, [&](std::size_t t) { out[t] = transfer_trial(f, pgw, d, seed, t); });
  std::uint64_t j = 0, e = 0;
  for (const auto& o : out) {
    j += o.j;
    e += o.event_e;
  }
  TransferReport r;
  r.lambda = lambda;
  r.d = d;
  r.trials = trials;
  r.density_j = estimate_proportion(j, trials);
  r.event_e_mc = estimate_proportion(e, trials);
  r.density_i = estimate_tree_density(f, TreeShape::regular(d), trials, derive(seed, Stream::check), workers);
  r.event_e_exact = event_E_exact(lambda, d);
  r.upper = r.density_i.mean;
  r.lower = r.density_i.mean * r.event_e_exact;
  const double sigma = combined_stderr(r.density_j, r.density_i);
  r.sandwich_holds = r.density_j.mean >= r.lower - 3.0 * sigma && r.density_j.mean <= r.upper + 3.0 * sigma;
  return r;
}

}  // namespace fiid
