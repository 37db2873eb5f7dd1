#pragma once

// Exact first-moment counting for k-tuples of independent sets in the
// configuration model and in coupled Erdos-Renyi graphs, plus exhaustive
// oracles for tiny instances.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/graph.hpp"
#include "fiid/profiles.hpp"

namespace fiid {

inline double log_factorial(double m) { return std::lgamma(m + 1.0); }

/// log (m-1)!! for even m >= 0, via (m-1)!! = m! / (2^{m/2} (m/2)!).
inline double log_double_factorial_odd(std::int64_t m) {
  require(m >= 0 && m % 2 == 0, "pairing count needs an even number of half-edges");
  const double h = static_cast<double>(m) / 2.0;
  return log_factorial(static_cast<double>(m)) - h * std::log(2.0) - log_factorial(h);
}

/// Rounds x to an integer, rejecting values further than 1e-9 from one.
inline std::int64_t integral(double x, const std::string& what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x))) throw InputError(what + " is not integral");
  return static_cast<std::int64_t>(r);
}

/// Cell sizes n * pi(T), required integral.
inline std::vector<std::int64_t> cell_counts(const PartitionMeasure& pi, std::size_t n) {
  std::vector<std::int64_t> c(pi.pi.size());
  for (Subset t = 0; t < c.size(); ++t)
    c[t] = integral(static_cast<double>(n) * pi.pi[t], "n*pi(" + std::to_string(t) + ")");
  return c;
}

inline double log_multinomial(std::span<const std::int64_t> parts) {
  double total = 0.0, s = 0.0;
  for (auto x : parts) {
    total += static_cast<double>(x);
    s -= log_factorial(static_cast<double>(x));
  }
  return s + log_factorial(total);
}

/// Integer half-edge counts m(T,T') = n d M(T,T').
struct EdgeCounts {
  int k = 0;
  std::vector<std::int64_t> m;

  std::size_t cells() const { return std::size_t{1} << k; }
  std::int64_t operator()(Subset a, Subset b) const { return m[a * cells() + b]; }
  std::int64_t& operator()(Subset a, Subset b) { return m[a * cells() + b]; }
};

inline EdgeProfile to_profile(const EdgeCounts& c, std::size_t n, int d) {
  const double nd = static_cast<double>(n) * d;
  EdgeProfile m{c.k, std::vector<double>(c.m.size())};
  for (std::size_t i = 0; i < c.m.size(); ++i) m.m[i] = static_cast<double>(c.m[i]) / nd;
  return m;
}

/// Checks that integer edge counts fit the cell sizes: symmetric, zero on
/// intersecting cells, even diagonal, row sums d * |cell|.
inline void check_compatible(const EdgeCounts& m, std::span<const std::int64_t> cells, int d) {
  const std::size_t c = m.cells();
  for (Subset a = 0; a < c; ++a) {
    std::int64_t row = 0;
    for (Subset b = 0; b < c; ++b) {
      require(m(a, b) >= 0, "edge count negative");
      require(m(a, b) == m(b, a), "edge profile not symmetric");
      if ((a & b) && m(a, b) != 0)
        throw InputError("support: edges between intersecting cells " + std::to_string(a) + "," +
                         std::to_string(b));
      row += m(a, b);
    }
    require(m(a, a) % 2 == 0, "n*d*M(T,T) must be even for T=" + std::to_string(a));
    require(row == d * cells[a], "marginal: row sum of cell " + std::to_string(a) +
                                     " differs from d*n*pi(T)");
  }
}

/// log E[Z(rho, M)] on the configuration model G(n, d): the number of
/// pairings realising the cell sizes n*pi and edge counts n*d*M, times the
/// number of vertex partitions, over (nd-1)!!.
inline double log_expected_Z(const DensityProfile& rho, const EdgeProfile& m, std::size_t n, int d) {
  check_config_params(n, d);
  require(m.k == rho.k, "profile sizes differ");
  const PartitionMeasure pi = rho_to_pi(rho);
  const auto cells = cell_counts(pi, n);
  const double nd = static_cast<double>(n) * d;
  EdgeCounts counts{m.k, std::vector<std::int64_t>(m.m.size())};
  require(m.m.size() == cells.size() * cells.size(), "edge profile needs 4^k entries");
  for (std::size_t i = 0; i < m.m.size(); ++i)
    counts.m[i] = integral(nd * m.m[i], "n*d*M entry " + std::to_string(i));
  check_compatible(counts, cells, d);

  double log_value = log_multinomial(cells);
  const std::size_t c = cells.size();
  for (Subset a = 0; a < c; ++a) {
    std::vector<std::int64_t> row(counts.m.begin() + a * c, counts.m.begin() + (a + 1) * c);
    log_value += log_multinomial(row);
    log_value += log_double_factorial_odd(counts(a, a));
    for (Subset b = a + 1; b < c; ++b) log_value += log_factorial(static_cast<double>(counts(a, b)));
  }
  return log_value - log_double_factorial_odd(static_cast<std::int64_t>(n) * d);
}

/// Every integer edge-count matrix compatible with rho on G(n, d).
inline std::vector<EdgeCounts> compatible_edge_counts(const DensityProfile& rho, std::size_t n, int d) {
  check_config_params(n, d);
  const PartitionMeasure pi = rho_to_pi(rho);
  const auto cells = cell_counts(pi, n);
  const std::size_t c = cells.size();

  // Free entries (a <= b, a and b disjoint); the last free entry touching a
  // row is forced by that row's remaining half-edges.
  std::vector<std::pair<Subset, Subset>> free;
  for (Subset a = 0; a < c; ++a)
    for (Subset b = a; b < c; ++b)
      if (!(a & b)) free.emplace_back(a, b);
  std::vector<std::size_t> last(c, 0);
  for (std::size_t i = 0; i < free.size(); ++i) {
    last[free[i].first] = i;
    last[free[i].second] = i;
  }

  std::vector<std::int64_t> remaining(c);
  for (Subset a = 0; a < c; ++a) remaining[a] = d * cells[a];
  EdgeCounts current{rho.k, std::vector<std::int64_t>(c * c, 0)};
  std::vector<EdgeCounts> out;

  std::function<void(std::size_t)> place = [&](std::size_t i) {
    if (i == free.size()) {
      for (auto r : remaining)
        if (r != 0) return;
      out.push_back(current);
      return;
    }
    const auto [a, b] = free[i];
    const bool forced_a = last[a] == i, forced_b = last[b] == i;
    std::int64_t lo = 0, hi = a == b ? remaining[a] : std::min(remaining[a], remaining[b]);
    if (forced_a) lo = hi = remaining[a];
    if (forced_b && a != b) {
      if (forced_a && remaining[b] != lo) return;
      lo = hi = remaining[b];
      if (remaining[a] < lo) return;
    }
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (a == b && x % 2) continue;
      if (x > remaining[a] || (a != b && x > remaining[b])) continue;
      current(a, b) = current(b, a) = x;
      remaining[a] -= x;
      if (a != b) remaining[b] -= x;
      place(i + 1);
      remaining[a] += x;
      if (a != b) remaining[b] += x;
    }
    current(a, b) = current(b, a) = 0;
  };
  place(0);
  return out;
}

/// log E[Z(rho)] = log sum over compatible M of E[Z(rho, M)]; -inf if none.
inline double log_expected_Z_total(const DensityProfile& rho, std::size_t n, int d) {
  const auto all = compatible_edge_counts(rho, n, d);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (const auto& m : all) {
    terms.push_back(log_expected_Z(rho, to_profile(m, n, d), n, d));
    best = std::max(best, terms.back());
  }
  if (terms.empty()) return best;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s);
}

/// Calls visit(pairing) for each of the (nd-1)!! perfect matchings of the
/// half-edges 0..nd-1.
template <class Visit>
void for_each_pairing(std::size_t n, int d, Visit&& visit) {
  check_config_params(n, d);
  const std::size_t m = n * static_cast<std::size_t>(d);
  Pairing pairs;
  std::vector<char> used(m, 0);
  std::function<void()> rec = [&] {
    std::size_t first = 0;
    while (first < m && used[first]) ++first;
    if (first == m) {
      visit(static_cast<const Pairing&>(pairs));
      return;
    }
    used[first] = 1;
    for (std::size_t other = first + 1; other < m; ++other) {
      if (used[other]) continue;
      used[other] = 1;
      pairs.emplace_back(static_cast<std::uint32_t>(first), static_cast<std::uint32_t>(other));
      rec();
      pairs.pop_back();
      used[other] = 0;
    }
    used[first] = 0;
  };
  rec();
}

inline constexpr std::size_t kBruteForceMaxN = 14;
inline constexpr int kBruteForceMaxK = 2;

namespace detail {

inline std::vector<std::uint32_t> independent_subsets(const MultiGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> bad(n, 0);  // neighbours of v as a mask, or all if looped
  for (const Edge& e : g.edges()) {
    if (e.u == e.v) {
      bad[e.u] |= 1u << e.u;
    } else {
      bad[e.u] |= 1u << e.v;
      bad[e.v] |= 1u << e.u;
    }
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    bool ok = true;
    for (std::uint32_t rest = s; ok && rest; rest &= rest - 1)
      ok = (bad[std::countr_zero(rest)] & s) == 0;
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace detail

/// Number of k-tuples (I_1..I_k) with I_i independent in gs[i] (or in gs[0]
/// for every i when one graph is given) whose density profile equals rho.
inline std::uint64_t brute_force_Z(std::span<const MultiGraph> gs, const DensityProfile& rho) {
  require(!gs.empty(), "need at least one graph");
  const std::size_t n = gs[0].size();
  require(n <= kBruteForceMaxN, "brute force limited to n <= 14");
  require(rho.k >= 1 && rho.k <= kBruteForceMaxK, "brute force limited to k <= 2");
  require(gs.size() == 1 || gs.size() == static_cast<std::size_t>(rho.k),
          "give one graph or one graph per set");
  for (const auto& g : gs) require(g.size() == n, "graphs must share the vertex set");
  std::vector<std::int64_t> target(rho.rho.size());
  for (Subset t = 0; t < target.size(); ++t)
    target[t] = integral(static_cast<double>(n) * rho.rho[t], "n*rho(" + std::to_string(t) + ")");

  const auto sets0 = detail::independent_subsets(gs[0]);
  if (rho.k == 1) {
    std::uint64_t count = 0;
    for (auto s : sets0)
      if (std::popcount(s) == target[1]) ++count;
    return count;
  }
  const auto sets1 = gs.size() == 1 ? sets0 : detail::independent_subsets(gs[1]);
  std::vector<std::uint32_t> a, b;
  for (auto s : sets0)
    if (std::popcount(s) == target[1]) a.push_back(s);
  for (auto s : sets1)
    if (std::popcount(s) == target[2]) b.push_back(s);
  std::uint64_t count = 0;
  for (auto x : a)
    for (auto y : b)
      if (std::popcount(x & y) == target[3]) ++count;
  return count;
}

inline std::uint64_t brute_force_Z(const MultiGraph& g, const DensityProfile& rho) {
  return brute_force_Z(std::span<const MultiGraph>(&g, 1), rho);
}

/// Average of brute_force_Z over every pairing of the configuration model,
/// with the same graph used for all k sets.
inline double config_mean_Z(std::size_t n, int d, const DensityProfile& rho) {
  double total = 0.0;
  std::uint64_t count = 0;
  for_each_pairing(n, d, [&](const Pairing& pairing) {
    total += static_cast<double>(brute_force_Z(glue(pairing, n, d), rho));
    ++count;
  });
  return total / static_cast<double>(count);
}

/// Number of vertex pairs {u,v} whose index sets intersect, counted
/// directly from per-vertex masks (bit i set iff the vertex lies in set i).
inline std::uint64_t intersecting_pairs_direct(std::span<const Subset> masks) {
  std::uint64_t count = 0;
  for (std::size_t u = 0; u < masks.size(); ++u)
    for (std::size_t v = u + 1; v < masks.size(); ++v)
      if (masks[u] & masks[v]) ++count;
  return count;
}

/// The same count from cell sizes c_T = n pi(T):
/// sum_{T != empty} C(c_T, 2) + (1/2) sum_{T != T', T cap T' != empty} c_T c_T'.
inline double intersecting_pairs_from_cells(std::span<const std::int64_t> cells) {
  double same = 0.0, cross = 0.0;
  for (Subset a = 1; a < cells.size(); ++a) {
    const double ca = static_cast<double>(cells[a]);
    same += ca * (ca - 1.0) / 2.0;
    for (Subset b = 1; b < cells.size(); ++b)
      if (a != b && (a & b)) cross += ca * static_cast<double>(cells[b]);
  }
  return same + cross / 2.0;
}

/// log of multinom(n; n pi) (1 - lambda/n)^{intersecting pairs}: the exact
/// expected count for k = 1 and an upper bound for coupled ER graphs.
inline double er_log_expected_Z(const DensityProfile& rho, std::size_t n, double lambda) {
  require(n >= 1, "ER graph needs n >= 1");
  require(lambda >= 0.0 && lambda < static_cast<double>(n), "ER bound needs 0 <= lambda < n");
  const auto cells = cell_counts(rho_to_pi(rho), n);
  const double pairs = intersecting_pairs_from_cells(cells);
  return log_multinomial(cells) + pairs * std::log1p(-lambda / static_cast<double>(n));
}

}  // namespace fiid
