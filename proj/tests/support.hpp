#pragma once

// Test-side generators and oracles. Everything here is written from the
// definitions directly and uses std::mt19937_64, so it shares no code path
// with the library beyond the public types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fiid/graph.hpp"
#include "fiid/profiles.hpp"
#include "fiid/stats.hpp"

namespace testing_support {

using fiid::Subset;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_); }
  int between(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// |estimate - truth| <= z standard errors (with a floor for exact zeros).
inline bool within_sigma(const fiid::MeanEstimate& e, double truth, double z = 3.0) {
  return std::abs(e.mean - truth) <= z * e.std_error + 1e-12;
}

/// Upper-tail z score of a chi-square statistic (Wilson-Hilferty).
inline double chi_square_z(double statistic, double dof) {
  const double a = 2.0 / (9.0 * dof);
  return (std::cbrt(statistic / dof) - (1.0 - a)) / std::sqrt(a);
}

/// Random probability vector over 2^k cells; `sparsity` zeroes cells.
inline std::vector<double> random_measure(Gen& g, int k, double sparsity = 0.0) {
  std::vector<double> pi(std::size_t{1} << k);
  double total = 0.0;
  for (double& x : pi) {
    x = g.coin(sparsity) ? 0.0 : -std::log(1.0 - g.uniform());
    total += x;
  }
  if (total == 0.0) {
    pi[0] = 1.0;
    return pi;
  }
  for (double& x : pi) x /= total;
  return pi;
}

/// rho(T) = sum over supersets, summed naively.
inline std::vector<double> naive_zeta(const std::vector<double>& pi) {
  std::vector<double> rho(pi.size(), 0.0);
  for (Subset t = 0; t < pi.size(); ++t)
    for (Subset u = 0; u < pi.size(); ++u)
      if ((u & t) == t) rho[t] += pi[u];
  return rho;
}

/// pi(T) = sum over supersets T' of (-1)^{|T' \ T|} rho(T'), summed naively.
inline std::vector<double> naive_mobius(const std::vector<double>& rho) {
  std::vector<double> pi(rho.size(), 0.0);
  for (Subset t = 0; t < rho.size(); ++t)
    for (Subset u = 0; u < rho.size(); ++u)
      if ((u & t) == t) pi[t] += (std::popcount(u & ~t) % 2 ? -1.0 : 1.0) * rho[u];
  return pi;
}

inline double naive_binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

/// Random non-increasing alpha in [0, 2].
inline std::vector<double> random_alpha(Gen& g, int k) {
  std::vector<double> a(static_cast<std::size_t>(k));
  double top = 2.0;
  for (double& x : a) {
    x = g.uniform(0.0, top);
    top = x;
  }
  return a;
}

/// Random symmetric edge profile supported on disjoint pairs, normalised.
inline fiid::EdgeProfile random_edge_profile(Gen& g, int k, double sparsity = 0.3) {
  const std::size_t c = std::size_t{1} << k;
  fiid::EdgeProfile m{k, std::vector<double>(c * c, 0.0)};
  double total = 0.0;
  for (Subset a = 0; a < c; ++a)
    for (Subset b = a; b < c; ++b) {
      if (a & b) continue;
      if (g.coin(sparsity)) continue;
      const double x = -std::log(1.0 - g.uniform());
      m(a, b) = x;
      m(b, a) = x;
      total += a == b ? x : 2.0 * x;
    }
  if (total == 0.0) {
    m(0, 0) = 1.0;
    return m;
  }
  for (double& x : m.m) x /= total;
  return m;
}

/// A partition measure with w constant on its support: uniform over m >= 2
/// disjoint nonempty blocks of [k], or uniform over all j-subsets with
/// 2j <= k. For k = 1 only the point mass at the empty set qualifies.
inline fiid::PartitionMeasure random_equality_measure(Gen& g, int k) {
  const std::size_t c = std::size_t{1} << k;
  std::vector<double> pi(c, 0.0);
  if (k == 1) {
    pi[0] = 1.0;
    return {k, pi};
  }
  if (g.coin()) {
    const int j = g.between(1, k / 2);
    double count = 0.0;
    for (Subset t = 0; t < c; ++t)
      if (std::popcount(t) == j) count += 1.0;
    for (Subset t = 0; t < c; ++t)
      if (std::popcount(t) == j) pi[t] = 1.0 / count;
    return {k, pi};
  }
  // Assign each element of [k] to one of `blocks` blocks or leave it out.
  for (;;) {
    const int blocks = g.between(2, k);
    std::vector<Subset> block(static_cast<std::size_t>(blocks), 0);
    for (int i = 0; i < k; ++i) {
      const int b = g.between(-1, blocks - 1);
      if (b >= 0) block[static_cast<std::size_t>(b)] |= Subset{1} << i;
    }
    std::vector<Subset> used;
    for (Subset b : block)
      if (b) used.push_back(b);
    if (used.size() < 2) continue;
    for (Subset b : used) pi[b] = 1.0 / static_cast<double>(used.size());
    return {k, pi};
  }
}

/// Cycle graph C_n.
inline fiid::MultiGraph cycle(std::size_t n) {
  std::vector<fiid::Edge> edges;
  for (std::size_t v = 0; v < n; ++v)
    edges.push_back({static_cast<fiid::Vertex>(v), static_cast<fiid::Vertex>((v + 1) % n)});
  return fiid::MultiGraph(n, edges);
}

/// Independent subsets of a graph with n <= 20, enumerated by brute force.
inline std::vector<std::uint32_t> independent_sets(const fiid::MultiGraph& g) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (1u << g.size()); ++s) {
    bool ok = true;
    for (const auto& e : g.edges())
      if ((s >> e.u & 1u) && (s >> e.v & 1u)) ok = false;
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace testing_support
