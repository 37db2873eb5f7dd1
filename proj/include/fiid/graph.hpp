#pragma once

// Finite host graphs: configuration-model multigraphs (loops and parallel
// edges kept) and Erdos-Renyi graphs, with a sorted incidence structure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/rng.hpp"
#include "json.hpp"

namespace fiid {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  friend constexpr bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphModel { custom, config, er };

inline const char* to_string(GraphModel m) {
  switch (m) {
    case GraphModel::config: return "config";
    case GraphModel::er: return "er";
    default: return "custom";
  }
}

/// Undirected multigraph on vertices 0..n-1. Edge ids are indices into
/// edges(). A loop {v,v} contributes two incidences at v.
class MultiGraph {
 public:
  struct Incidence {
    Vertex neighbor;
    std::uint32_t edge;
    friend constexpr auto operator<=>(const Incidence&, const Incidence&) = default;
  };

  MultiGraph() = default;

  MultiGraph(std::size_t n, std::vector<Edge> edges, GraphModel model = GraphModel::custom)
      : n_(n), edges_(std::move(edges)), model_(model) {
    std::vector<std::uint32_t> count(n_ + 1, 0);
    for (const Edge& e : edges_) {
      require(e.u < n_ && e.v < n_, "edge endpoint out of range");
      ++count[e.u + 1];
      ++count[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) count[i + 1] += count[i];
    offsets_ = count;
    incidences_.resize(offsets_.back());
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::uint32_t id = 0; id < edges_.size(); ++id) {
      const Edge& e = edges_[id];
      incidences_[fill[e.u]++] = {e.v, id};
      incidences_[fill[e.v]++] = {e.u, id};
    }
    for (std::size_t v = 0; v < n_; ++v)
      std::sort(incidences_.begin() + offsets_[v], incidences_.begin() + offsets_[v + 1]);
  }

  std::size_t size() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  GraphModel model() const noexcept { return model_; }

  std::span<const Incidence> incident(Vertex v) const noexcept {
    return {incidences_.data() + offsets_[v], incidences_.data() + offsets_[v + 1]};
  }
  /// Number of incident half-edges; a loop counts twice.
  std::size_t degree(Vertex v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  /// Half-edge degree for configuration-model instances.
  std::optional<int> regular_degree() const noexcept { return d_; }
  /// Mean-degree parameter for Erdos-Renyi instances.
  std::optional<double> mean_degree() const noexcept { return lambda_; }

  void set_regular_degree(int d) { d_ = d; }
  void set_mean_degree(double lambda) { lambda_ = lambda; }

  bool has_loop_or_multi_edge() const {
    for (Vertex v = 0; v < n_; ++v) {
      const auto inc = incident(v);
      for (std::size_t i = 0; i < inc.size(); ++i) {
        if (inc[i].neighbor == v) return true;
        if (i > 0 && inc[i].neighbor == inc[i - 1].neighbor) return true;
      }
    }
    return false;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  GraphModel model_ = GraphModel::custom;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<Incidence> incidences_;
  std::optional<int> d_;
  std::optional<double> lambda_;
};

/// A perfect matching of the n*d half-edges; half-edge h sits at vertex h / d.
/// Pairs are stored with first < second, sorted.
using Pairing = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

inline void check_config_params(std::size_t n, int d) {
  require(n >= 1, "configuration model needs n >= 1");
  require(d >= 1, "configuration model needs d >= 1");
  require((n * static_cast<std::size_t>(d)) % 2 == 0, "n*d must be even");
}

/// Uniform pairing: Fisher-Yates shuffle, then pair consecutive entries.
inline Pairing sample_pairing(std::size_t n, int d, Seed seed) {
  check_config_params(n, d);
  const std::size_t m = n * static_cast<std::size_t>(d);
  std::vector<std::uint32_t> halves(m);
  for (std::size_t h = 0; h < m; ++h) halves[h] = static_cast<std::uint32_t>(h);
  SplitMix64 rng(derive(seed, Stream::graph));
  for (std::size_t i = m - 1; i > 0; --i) std::swap(halves[i], halves[rng.bounded(i + 1)]);
  Pairing pairs;
  pairs.reserve(m / 2);
  for (std::size_t i = 0; i < m; i += 2)
    pairs.emplace_back(std::min(halves[i], halves[i + 1]), std::max(halves[i], halves[i + 1]));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

/// Glues paired half-edges into edges.
inline MultiGraph glue(const Pairing& pairing, std::size_t n, int d) {
  check_config_params(n, d);
  std::vector<Edge> edges;
  edges.reserve(pairing.size());
  const auto dd = static_cast<std::uint32_t>(d);
  for (const auto& [a, b] : pairing) edges.push_back({a / dd, b / dd});
  MultiGraph g(n, std::move(edges), GraphModel::config);
  g.set_regular_degree(d);
  return g;
}

inline MultiGraph sample_config_model(std::size_t n, int d, Seed seed) {
  return glue(sample_pairing(n, d, seed), n, d);
}

/// Visits each unordered pair {verts[a], verts[b]}, a < b, independently
/// with probability p, skipping geometrically between hits.
template <class Emit>
void for_each_bernoulli_pair(std::span<const Vertex> verts, double p, SplitMix64& rng, Emit&& emit) {
  const std::size_t m = verts.size();
  if (m < 2 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::size_t b = 1; b < m; ++b)
      for (std::size_t a = 0; a < b; ++a) emit(verts[a], verts[b]);
    return;
  }
  const double log_q = std::log1p(-p);
  // Pairs enumerated as (a, b) with a < b, ordered by b then a.
  std::size_t b = 1;
  double a = -1.0;
  while (b < m) {
    const double skip = std::floor(std::log1p(-rng.uniform()) / log_q);
    a += 1.0 + skip;
    while (b < m && a >= static_cast<double>(b)) {
      a -= static_cast<double>(b);
      ++b;
    }
    if (b < m) emit(verts[static_cast<std::size_t>(a)], verts[b]);
  }
}

/// ER(n, lambda/n): every unordered pair present independently.
inline MultiGraph sample_er(std::size_t n, double lambda, Seed seed) {
  require(n >= 1, "ER graph needs n >= 1");
  require(lambda >= 0.0, "ER mean degree must be non-negative");
  require(lambda <= static_cast<double>(n), "ER mean degree must not exceed n");
  std::vector<Vertex> all(n);
  for (std::size_t v = 0; v < n; ++v) all[v] = static_cast<Vertex>(v);
  std::vector<Edge> edges;
  SplitMix64 rng(derive(seed, Stream::graph));
  for_each_bernoulli_pair(all, lambda / static_cast<double>(n), rng,
                          [&](Vertex a, Vertex b) { edges.push_back({a, b}); });
  MultiGraph g(n, std::move(edges), GraphModel::er);
  g.set_mean_degree(lambda);
  return g;
}

inline nlohmann::json to_json(const MultiGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  nlohmann::json params = nlohmann::json::object();
  if (g.regular_degree()) params["d"] = *g.regular_degree();
  if (g.mean_degree()) params["lambda"] = *g.mean_degree();
  return {{"n", g.size()}, {"edges", std::move(edges)}, {"model", to_string(g.model())},
          {"params", std::move(params)}};
}

inline MultiGraph graph_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<Vertex>(), e.at(1).get<Vertex>()});
  const std::string model = j.value("model", std::string("custom"));
  const GraphModel m = model == "config" ? GraphModel::config
                       : model == "er"   ? GraphModel::er
                                         : GraphModel::custom;
  MultiGraph g(n, std::move(edges), m);
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (p.contains("d")) g.set_regular_degree(p.at("d").get<int>());
    if (p.contains("lambda")) g.set_mean_degree(p.at("lambda").get<double>());
  }
  return g;
}

}  // namespace fiid
