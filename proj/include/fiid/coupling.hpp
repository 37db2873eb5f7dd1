#pragma once

// Correlated families of factor-of-i.i.d. independent sets. A density-p
// percolation S is drawn once per trial; copy i uses the base labels X_0
// off S and its own labels X_i on S (and, on Erdos-Renyi hosts, its own
// edges inside S). Percolation and labels use common random numbers across
// p: the same uniform decides membership of S at every p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/factor.hpp"
#include "fiid/graph.hpp"
#include "fiid/label.hpp"
#include "fiid/neighborhood.hpp"
#include "fiid/parallel.hpp"
#include "fiid/profiles.hpp"
#include "fiid/projection.hpp"
#include "fiid/rng.hpp"
#include "fiid/stats.hpp"
#include "fiid/tree.hpp"

namespace fiid {

struct HostSpec {
  enum class Kind { regular_tree, pgw_tree, config, er };

  Kind kind = Kind::regular_tree;
  int d = 3;
  double lambda = 0.0;
  std::size_t n = 0;

  static HostSpec regular_tree(int d) { return {Kind::regular_tree, d, 0.0, 0}; }
  static HostSpec pgw_tree(double lambda) { return {Kind::pgw_tree, 0, lambda, 0}; }
  static HostSpec config(std::size_t n, int d) { return {Kind::config, d, 0.0, n}; }
  static HostSpec er(std::size_t n, double lambda) { return {Kind::er, 0, lambda, n}; }

  bool is_tree() const { return kind == Kind::regular_tree || kind == Kind::pgw_tree; }
  TreeShape shape() const {
    return kind == Kind::regular_tree ? TreeShape::regular(d) : TreeShape::pgw(lambda);
  }
  /// d for regular hosts, lambda for Poisson hosts.
  double degree_param() const {
    return kind == Kind::regular_tree || kind == Kind::config ? d : lambda;
  }
  std::string name() const {
    switch (kind) {
      case Kind::regular_tree: return "tree";
      case Kind::pgw_tree: return "pgw";
      case Kind::config: return "config";
      default: return "er";
    }
  }
};

struct CouplingConfig {
  double p = 0.0;
  int k = 1;
  Factor factor = constant_zero();
  HostSpec host;
  std::uint64_t trials = 1000;
  std::uint64_t inner_trials = 400;
  Seed seed = 1;
  unsigned workers = 1;
};

inline void validate(const CouplingConfig& cfg) {
  require(cfg.p >= 0.0 && cfg.p <= 1.0, "p must lie in [0, 1]");
  require(cfg.k >= 1 && cfg.k <= kMaxProfileK, "k must lie in [1, 20]");
  require(cfg.trials >= 1, "need at least one trial");
  require(cfg.inner_trials >= 1, "need at least one inner trial");
  switch (cfg.host.kind) {
    case HostSpec::Kind::regular_tree: require(cfg.host.d >= 2, "tree host needs d >= 2"); break;
    case HostSpec::Kind::pgw_tree: require(cfg.host.lambda > 0.0, "pgw host needs lambda > 0"); break;
    case HostSpec::Kind::config: check_config_params(cfg.host.n, cfg.host.d); break;
    case HostSpec::Kind::er:
      require(cfg.host.n >= 1, "ER host needs n >= 1");
      require(cfg.host.lambda >= 0.0 && cfg.host.lambda <= static_cast<double>(cfg.host.n),
              "ER host needs 0 <= lambda <= n");
      break;
  }
}

/// Whether the vertex with this id/key lies in the percolation of `trial`.
inline bool percolated(Seed seed, std::uint64_t trial, std::uint64_t key, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return unit_interval(derive(seed, Stream::percolation, trial, key)) < p;
}

/// Bernoulli(p) subset of `vertices`.
inline std::vector<Vertex> percolate(std::span<const Vertex> vertices, double p, Seed seed,
                                     std::uint64_t trial = 0) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  std::vector<Vertex> out;
  for (Vertex v : vertices)
    if (percolated(seed, trial, v, p)) out.push_back(v);
  return out;
}

/// Labels of copy `copy` (0 = the base labelling X_0).
inline Label coupled_label(Seed seed, std::uint64_t trial, std::uint64_t copy, std::uint64_t key,
                           double p) {
  const std::uint64_t source = copy != 0 && percolated(seed, trial, key, p) ? copy : 0;
  return Label{derive(seed, Stream::labels, trial, source, key), key};
}

inline KeyLabeler coupled_labels(Seed seed, std::uint64_t trial, std::uint64_t copy, double p) {
  return [=](std::uint64_t key) { return coupled_label(seed, trial, copy, key, p); };
}

inline std::vector<Label> coupled_graph_labels(std::size_t n, Seed seed, std::uint64_t trial,
                                               std::uint64_t copy, double p) {
  std::vector<Label> labels(n);
  for (Vertex v = 0; v < n; ++v) labels[v] = coupled_label(seed, trial, copy, v, p);
  return labels;
}

/// Densities of the prefix intersections I_1 cap ... cap I_i, i = 1..k.
struct IntersectionEstimate {
  int k = 0;
  std::vector<MeanEstimate> prefix;

  /// alpha_i = density_i / scale (scale = log d / d or log lambda / lambda).
  double alpha(int i, double scale) const { return prefix[i - 1].mean / scale; }
  std::vector<double> alphas(double scale) const {
    std::vector<double> a;
    for (int i = 1; i <= k; ++i) a.push_back(alpha(i, scale));
    return a;
  }
};

/// Per-trial copy-membership masks of the root (bit i-1 for copy i).
struct TreeCouplingRun {
  IntersectionEstimate estimate;
  std::vector<std::uint32_t> masks;
};

/// Per-trial density profiles on finite hosts.
struct GraphCouplingRun {
  IntersectionEstimate estimate;
  std::vector<DensityProfile> profiles;
  /// B(G)/n of each trial's host graph.
  std::vector<double> non_tree_fraction;
};

inline IntersectionEstimate prefix_from_masks(int k, const std::vector<std::uint32_t>& masks) {
  IntersectionEstimate est{k, {}};
  for (int i = 1; i <= k; ++i) {
    const std::uint32_t need = (i == 32) ? 0xffffffffu : ((1u << i) - 1);
    std::uint64_t hits = 0;
    for (auto m : masks) hits += (m & need) == need;
    est.prefix.push_back(estimate_proportion(hits, masks.size()));
  }
  return est;
}

/// Root bits of copies 1..k on the regular or PGW tree of one trial.
inline std::uint32_t tree_coupling_trial(const CouplingConfig& cfg, std::uint64_t t) {
  LazyTree tree(cfg.host.shape(), cfg.factor.radius(), derive(cfg.seed, Stream::tree, t),
                coupled_labels(cfg.seed, t, 1, cfg.p));
  std::uint32_t mask = cfg.factor.rule(tree) ? 1u : 0u;
  for (int c = 2; c <= cfg.k; ++c) {
    tree.relabel(coupled_labels(cfg.seed, t, static_cast<std::uint64_t>(c), cfg.p));
    if (cfg.factor.rule(tree)) mask |= 1u << (c - 1);
  }
  return mask;
}

inline TreeCouplingRun coupled_tree_intersections(const CouplingConfig& cfg) {
  validate(cfg);
  require(cfg.host.is_tree(), "tree coupling needs a tree host");
  TreeCouplingRun run;
  run.masks.assign(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) { run.masks[t] = tree_coupling_trial(cfg, t); });
  run.estimate = prefix_from_masks(cfg.k, run.masks);
  return run;
}

/// Copies of an ER graph that keep every edge not inside S x S and redraw
/// the pairs inside S independently with probability lambda/n.
inline MultiGraph er_resample(const MultiGraph& g, std::span<const Vertex> s,
                              const std::vector<char>& in_s, double lambda, SplitMix64& rng) {
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (!(in_s[e.u] && in_s[e.v])) edges.push_back(e);
  for_each_bernoulli_pair(s, lambda / static_cast<double>(g.size()), rng,
                          [&](Vertex a, Vertex b) { edges.push_back({a, b}); });
  MultiGraph out(g.size(), std::move(edges), GraphModel::er);
  out.set_mean_degree(lambda);
  return out;
}

/// G^1..G^k for one trial; copy i draws from (seed, resample stream, trial, i).
inline std::vector<MultiGraph> er_resample_graphs(const MultiGraph& g, std::span<const Vertex> s,
                                                  double lambda, int k, Seed seed,
                                                  std::uint64_t trial = 0) {
  require(lambda >= 0.0 && lambda <= static_cast<double>(g.size()), "ER resampling needs 0 <= lambda <= n");
  std::vector<char> in_s(g.size(), 0);
  for (Vertex v : s) {
    require(v < g.size(), "percolated vertex out of range");
    in_s[v] = 1;
  }
  std::vector<MultiGraph> out;
  for (int c = 1; c <= k; ++c) {
    SplitMix64 rng(derive(seed, Stream::resample, trial, static_cast<std::uint64_t>(c)));
    out.push_back(er_resample(g, s, in_s, lambda, rng));
  }
  return out;
}

/// Density profile of k vertex sets given per-vertex copy masks.
inline DensityProfile profile_from_masks(int k, const std::vector<std::uint32_t>& masks) {
  std::vector<double> cells(lattice_size(k), 0.0);
  for (auto m : masks) cells[m] += 1.0;
  for (double& c : cells) c /= static_cast<double>(masks.size());
  superset_zeta(cells);
  cells[0] = 1.0;
  return {k, std::move(cells)};
}

inline MultiGraph sample_host_graph(const HostSpec& host, Seed seed, std::uint64_t trial) {
  const Seed graph_seed = derive(seed, Stream::graph, trial);
  return host.kind == HostSpec::Kind::config ? sample_config_model(host.n, host.d, graph_seed)
                                             : sample_er(host.n, host.lambda, graph_seed);
}

struct GraphTrial {
  DensityProfile profile;
  double non_tree_fraction = 0.0;
};

inline GraphTrial graph_coupling_trial(const CouplingConfig& cfg, std::uint64_t t) {
  const MultiGraph g = sample_host_graph(cfg.host, cfg.seed, t);
  const std::size_t n = g.size();
  std::vector<std::uint32_t> masks(n, 0);
  std::vector<MultiGraph> resampled;
  if (cfg.host.kind == HostSpec::Kind::er) {
    std::vector<Vertex> all(n);
    for (Vertex v = 0; v < n; ++v) all[v] = v;
    const auto s = percolate(all, cfg.p, cfg.seed, t);
    resampled = er_resample_graphs(g, s, cfg.host.lambda, cfg.k, cfg.seed, t);
  }
  double bad = 0.0;
  for (int c = 1; c <= cfg.k; ++c) {
    const MultiGraph& host = resampled.empty() ? g : resampled[c - 1];
    const auto labels = coupled_graph_labels(n, cfg.seed, t, static_cast<std::uint64_t>(c), cfg.p);
    const auto set = project_to_graph(cfg.factor, host, labels);
    for (Vertex v = 0; v < n; ++v)
      if (set.member[v]) masks[v] |= 1u << (c - 1);
    if (c == 1) bad = static_cast<double>(count_non_tree_vertices(host, cfg.factor.radius()));
  }
  return {profile_from_masks(cfg.k, masks), bad / static_cast<double>(n)};
}

/// Coupled independent sets on configuration-model or ER hosts; each trial
/// samples a fresh host graph.
inline GraphCouplingRun coupled_graph_intersections(const CouplingConfig& cfg) {
  validate(cfg);
  require(!cfg.host.is_tree(), "graph coupling needs a config or er host");
  std::vector<GraphTrial> trials(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) { trials[t] = graph_coupling_trial(cfg, t); });
  GraphCouplingRun run;
  run.estimate.k = cfg.k;
  for (int i = 1; i <= cfg.k; ++i) {
    const Subset prefix = static_cast<Subset>((std::uint64_t{1} << i) - 1);
    std::vector<double> xs;
    for (const auto& tr : trials) xs.push_back(tr.profile.rho[prefix]);
    run.estimate.prefix.push_back(estimate_mean(xs));
  }
  for (auto& tr : trials) {
    run.profiles.push_back(std::move(tr.profile));
    run.non_tree_fraction.push_back(tr.non_tree_fraction);
  }
  return run;
}

inline GraphCouplingRun coupled_er_intersections(const CouplingConfig& cfg) {
  require(cfg.host.kind == HostSpec::Kind::er, "ER coupling needs an er host");
  return coupled_graph_intersections(cfg);
}

/// Prefix intersection densities for any host.
inline IntersectionEstimate coupled_intersections(const CouplingConfig& cfg) {
  return cfg.host.is_tree() ? coupled_tree_intersections(cfg).estimate
                            : coupled_graph_intersections(cfg).estimate;
}

/// Delete-one jackknife estimate of q^m from c successes in n Bernoulli(q)
/// trials; unbiased for m = 0, 1, 2.
inline double jackknife_power(std::uint64_t c, std::uint64_t n, double m) {
  const double q = static_cast<double>(c) / static_cast<double>(n);
  if (n < 2) return std::pow(q, m);
  const double nm1 = static_cast<double>(n - 1);
  const double drop_hit = c > 0 ? std::pow(static_cast<double>(c - 1) / nm1, m) : 0.0;
  const double drop_miss = c < n ? std::pow(static_cast<double>(c) / nm1, m) : 0.0;
  const double loo = q * drop_hit + (1.0 - q) * drop_miss;
  return static_cast<double>(n) * std::pow(q, m) - nm1 * loo;
}

struct MomentEstimate {
  double m = 0.0;
  /// E*[Q^m]: mean over accepted outer trials.
  MeanEstimate conditional;
  /// E[f(X_0) Q^m] over all outer trials, equal to E*[Q^m] times the density.
  MeanEstimate joint;
};

struct StabilityEstimate {
  std::uint64_t outer_trials = 0;
  std::uint64_t accepted = 0;
  std::uint64_t inner_trials = 0;
  /// Fraction of outer trials with root bit 1.
  MeanEstimate density;
  /// Q = (inner successes)/inner_trials for each accepted outer trial.
  std::vector<double> q;
  std::vector<MomentEstimate> moments;
};

namespace detail {

// Inner successes for one outer trial, or nullopt if the root bit under
// X_0 is 0.
inline std::optional<std::uint64_t> tree_stability_trial(const CouplingConfig& cfg, std::uint64_t t) {
  LazyTree tree(cfg.host.shape(), cfg.factor.radius(), derive(cfg.seed, Stream::tree, t),
                coupled_labels(cfg.seed, t, 0, cfg.p));
  if (!cfg.factor.rule(tree)) return std::nullopt;
  if (cfg.p <= 0.0) return cfg.inner_trials;
  std::uint64_t hits = 0;
  const Seed seed = cfg.seed;
  const double p = cfg.p;
  for (std::uint64_t s = 0; s < cfg.inner_trials; ++s) {
    tree.relabel([=](std::uint64_t key) {
      return percolated(seed, t, key, p) ? Label{derive(seed, Stream::inner, t, s, key), key}
                                         : coupled_label(seed, t, 0, key, p);
    });
    hits += cfg.factor.rule(tree) ? 1 : 0;
  }
  return hits;
}

inline std::optional<std::uint64_t> graph_stability_trial(const CouplingConfig& cfg, std::uint64_t t) {
  const MultiGraph g = sample_host_graph(cfg.host, cfg.seed, t);
  const std::size_t n = g.size();
  SplitMix64 pick(derive(cfg.seed, Stream::root, t));
  const auto root = static_cast<Vertex>(pick.bounded(n));
  const int r = cfg.factor.radius();
  auto base = coupled_graph_labels(n, cfg.seed, t, 0, cfg.p);
  BallScratch scratch(n);
  auto root_bit = [&](const MultiGraph& host, std::span<const Label> labels) {
    if (!ball_is_tree(host, root, r + 1, scratch)) return false;
    return cfg.factor.rule(neighborhood(host, root, r, labels, scratch));
  };
  if (!root_bit(g, base)) return std::nullopt;
  if (cfg.p <= 0.0) return cfg.inner_trials;

  std::vector<Vertex> all(n);
  for (Vertex v = 0; v < n; ++v) all[v] = v;
  const auto s = percolate(all, cfg.p, cfg.seed, t);
  std::vector<char> in_s(n, 0);
  for (Vertex v : s) in_s[v] = 1;
  const bool er = cfg.host.kind == HostSpec::Kind::er;

  std::uint64_t hits = 0;
  std::vector<Label> labels = base;
  for (std::uint64_t i = 0; i < cfg.inner_trials; ++i) {
    for (Vertex v : s) labels[v] = Label{derive(cfg.seed, Stream::inner, t, i, v), v};
    if (er) {
      SplitMix64 rng(derive(cfg.seed, Stream::inner, t, i));
      hits += root_bit(er_resample(g, s, in_s, cfg.host.lambda, rng), labels) ? 1 : 0;
    } else {
      hits += root_bit(g, labels) ? 1 : 0;
    }
  }
  return hits;
}

}  // namespace detail

/// Nested Monte Carlo for the stability Q = P[root stays | X_0 off S, S]
/// conditioned on the root being in the base set. Moments are jackknife
/// corrected per outer trial. On graph hosts the root is a uniform vertex.
inline StabilityEstimate estimate_stability(const CouplingConfig& cfg, const std::vector<double>& moments) {
  validate(cfg);
  std::vector<std::optional<std::uint64_t>> hits(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
    hits[t] = cfg.host.is_tree() ? detail::tree_stability_trial(cfg, t)
                                 : detail::graph_stability_trial(cfg, t);
  });
  StabilityEstimate est;
  est.outer_trials = cfg.trials;
  est.inner_trials = cfg.inner_trials;
  for (const auto& h : hits)
    if (h) {
      ++est.accepted;
      est.q.push_back(static_cast<double>(*h) / static_cast<double>(cfg.inner_trials));
    }
  est.density = estimate_proportion(est.accepted, cfg.trials);
  if (est.accepted == 0) throw NumericalError("conditioning event not observed");
  for (double m : moments) {
    require(m >= 0.0, "moment order must be non-negative");
    std::vector<double> joint(cfg.trials, 0.0), conditional;
    for (std::size_t t = 0; t < hits.size(); ++t)
      if (hits[t]) {
        joint[t] = jackknife_power(*hits[t], cfg.inner_trials, m);
        conditional.push_back(joint[t]);
      }
    est.moments.push_back({m, estimate_mean(conditional), estimate_mean(joint)});
  }
  return est;
}

struct ScanRow {
  double p = 0.0;
  IntersectionEstimate intersections;
  /// E*[Q^{i-1}] for i = 1..k, when stability was requested.
  std::vector<MomentEstimate> moments;
  std::optional<double> binom2;
  std::optional<double> binom3;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  /// Largest change of any prefix density between adjacent grid points.
  double max_adjacent_jump = 0.0;
};

/// Binomial-sum statistic of the first m normalised densities, if k >= m.
inline std::optional<double> binom_statistic(const IntersectionEstimate& est, int m, double scale) {
  if (est.k < m) return std::nullopt;
  std::vector<double> alpha;
  for (int i = 1; i <= m; ++i) alpha.push_back(est.alpha(i, scale));
  return binom_sum(alpha);
}

inline double host_alpha_scale(const HostSpec& host) { return alpha_scale(host.degree_param()); }

inline ScanReport scan_p(const CouplingConfig& cfg, const std::vector<double>& grid, bool with_stability) {
  require(!grid.empty(), "empty p grid");
  ScanReport report;
  const double scale = host_alpha_scale(cfg.host);
  for (double p : grid) {
    require(p >= 0.0 && p <= 1.0, "grid points must lie in [0, 1]");
    CouplingConfig at = cfg;
    at.p = p;
    ScanRow row;
    row.p = p;
    row.intersections = coupled_intersections(at);
    if (with_stability) {
      std::vector<double> orders;
      for (int i = 1; i <= cfg.k; ++i) orders.push_back(i - 1.0);
      row.moments = estimate_stability(at, orders).moments;
    }
    row.binom2 = binom_statistic(row.intersections, 2, scale);
    row.binom3 = binom_statistic(row.intersections, 3, scale);
    report.rows.push_back(std::move(row));
  }
  for (std::size_t j = 1; j < report.rows.size(); ++j)
    for (int i = 0; i < cfg.k; ++i)
      report.max_adjacent_jump =
          std::max(report.max_adjacent_jump, std::abs(report.rows[j].intersections.prefix[i].mean -
                                                      report.rows[j - 1].intersections.prefix[i].mean));
  return report;
}

struct MomentRoot {
  double p = 0.0;
  MeanEstimate value;
  double residual = 0.0;   // |value - target|
  double tolerance = 0.0;  // 3 standard errors
};

/// A p with E*[Q^u](p) within 3 standard errors of target. Scans a grid,
/// then bisects the first interval where (estimate - target) changes sign;
/// monotonicity in p is not assumed.
inline MomentRoot find_p_for_moment(const CouplingConfig& cfg, double u, double target,
                                    int grid_points = 11, int refine_steps = 12) {
  require(u > 0.0, "moment order must be positive");
  require(grid_points >= 2, "need at least two grid points");
  auto evaluate = [&](double p) {
    CouplingConfig at = cfg;
    at.p = p;
    const MeanEstimate e = estimate_stability(at, {u}).moments[0].conditional;
    return MomentRoot{p, e, std::abs(e.mean - target), 3.0 * e.std_error};
  };
  auto within = [](const MomentRoot& r) { return r.residual <= std::max(r.tolerance, 1e-12); };

  std::vector<MomentRoot> grid;
  for (int j = 0; j < grid_points; ++j) grid.push_back(evaluate(static_cast<double>(j) / (grid_points - 1)));
  const MomentRoot* best = nullptr;
  for (const auto& g : grid)
    if (within(g) && (!best || g.residual < best->residual)) best = &g;
  if (best) return *best;

  for (std::size_t j = 1; j < grid.size(); ++j) {
    MomentRoot lo = grid[j - 1], hi = grid[j];
    if ((lo.value.mean - target) * (hi.value.mean - target) > 0.0) continue;
    MomentRoot closest = lo.residual < hi.residual ? lo : hi;
    for (int step = 0; step < refine_steps; ++step) {
      MomentRoot mid = evaluate(0.5 * (lo.p + hi.p));
      if (mid.residual < closest.residual) closest = mid;
      if (within(mid)) return mid;
      if ((lo.value.mean - target) * (mid.value.mean - target) <= 0.0) hi = mid;
      else lo = mid;
    }
    return closest;
  }
  throw NumericalError("no crossing in [0,1]");
}

}  // namespace fiid
