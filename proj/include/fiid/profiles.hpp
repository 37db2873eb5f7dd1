#pragma once

// Profiles of k-tuples of vertex sets. Subsets T of [k] = {1..k} are
// bitmasks (bit i-1 set iff i in T), so every lattice function is a dense
// array of length 2^k.
//
//   rho(T): density of the intersection of the sets indexed by T
//   pi(T):  density of the cell "exactly the sets in T"
//   M(T,T'): fraction of directed edges running from cell T to cell T'

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fiid/errors.hpp"
#include "json.hpp"

namespace fiid {

inline constexpr int kMaxProfileK = 20;
inline constexpr double kProfileTolerance = 1e-12;

using Subset = std::uint32_t;

inline std::size_t lattice_size(int k) {
  require(k >= 0 && k <= kMaxProfileK, "profile k must lie in [0, 20]");
  return std::size_t{1} << k;
}

inline int cardinality(Subset t) { return std::popcount(t); }

/// f(T) <- sum over T' containing T of f(T').
inline void superset_zeta(std::vector<double>& f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1)
    for (std::size_t t = 0; t < f.size(); ++t)
      if (!(t & bit)) f[t] += f[t | bit];
}

/// Inverse of superset_zeta: f(T) <- sum over T' containing T of
/// (-1)^{|T' \ T|} f(T').
inline void superset_mobius(std::vector<double>& f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1)
    for (std::size_t t = 0; t < f.size(); ++t)
      if (!(t & bit)) f[t] -= f[t | bit];
}

/// f(T) <- sum over subsets T' of T of f(T').
inline void subset_zeta(std::vector<double>& f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1)
    for (std::size_t t = 0; t < f.size(); ++t)
      if (t & bit) f[t] += f[t ^ bit];
}

struct DensityProfile {
  int k = 0;
  std::vector<double> rho;  // rho[0] = 1

  double operator[](Subset t) const { return rho[t]; }
};

struct PartitionMeasure {
  int k = 0;
  std::vector<double> pi;

  double operator[](Subset t) const { return pi[t]; }
};

/// Symmetric 2^k x 2^k matrix stored row-major.
struct EdgeProfile {
  int k = 0;
  std::vector<double> m;

  std::size_t cells() const { return std::size_t{1} << k; }
  double operator()(Subset a, Subset b) const { return m[a * cells() + b]; }
  double& operator()(Subset a, Subset b) { return m[a * cells() + b]; }
};

inline DensityProfile make_density_profile(int k, std::vector<double> rho) {
  require(rho.size() == lattice_size(k), "density profile needs 2^k entries");
  require(std::abs(rho[0] - 1.0) <= kProfileTolerance, "density profile must have rho(empty) = 1");
  return {k, std::move(rho)};
}

/// pi(T) = sum over T' containing T of (-1)^{|T' \ T|} rho(T').
inline PartitionMeasure rho_to_pi(const DensityProfile& rho) {
  require(rho.rho.size() == lattice_size(rho.k), "density profile needs 2^k entries");
  std::vector<double> pi = rho.rho;
  superset_mobius(pi);
  for (Subset t = 0; t < pi.size(); ++t)
    if (pi[t] < -kProfileTolerance)
      throw InputError("inconsistent density profile: cell mass pi(" + std::to_string(t) + ") = " +
                       std::to_string(pi[t]) + " is negative");
  return {rho.k, std::move(pi)};
}

/// rho(T) = sum over T' containing T of pi(T').
inline DensityProfile pi_to_rho(const PartitionMeasure& pi) {
  require(pi.pi.size() == lattice_size(pi.k), "partition measure needs 2^k entries");
  std::vector<double> rho = pi.pi;
  superset_zeta(rho);
  return {pi.k, std::move(rho)};
}

/// w(T) = sum of pi(T') over T' disjoint from T.
inline std::vector<double> disjoint_weights(const PartitionMeasure& pi) {
  std::vector<double> below = pi.pi;
  subset_zeta(below);
  const Subset full = static_cast<Subset>(pi.pi.size() - 1);
  std::vector<double> w(pi.pi.size());
  for (Subset t = 0; t < w.size(); ++t) w[t] = below[full & ~t];
  return w;
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0));
}

/// Exact binomial table row C(n, 0..n) by Pascal's rule.
inline std::vector<double> binomial_row(int n) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  row[0] = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) row[j] += row[j - 1];
  return row;
}

/// Symmetric transform alpha -> beta; alpha[i-1] = alpha_i, beta[j-1] is
/// beta(T) for any |T| = j: beta_j = sum_{i>=j} (-1)^{i-j} C(k-j, i-j) alpha_i.
inline std::vector<double> alpha_to_beta(const std::vector<double>& alpha) {
  const int k = static_cast<int>(alpha.size());
  std::vector<double> beta(alpha.size(), 0.0);
  for (int j = 1; j <= k; ++j) {
    const auto c = binomial_row(k - j);
    double s = 0.0;
    for (int i = j; i <= k; ++i) s += ((i - j) % 2 ? -1.0 : 1.0) * c[i - j] * alpha[i - 1];
    beta[j - 1] = s;
  }
  return beta;
}

/// Inverse: alpha_j = sum_{i>=j} C(k-j, i-j) beta_i.
inline std::vector<double> beta_to_alpha(const std::vector<double>& beta) {
  const int k = static_cast<int>(beta.size());
  std::vector<double> alpha(beta.size(), 0.0);
  for (int j = 1; j <= k; ++j) {
    const auto c = binomial_row(k - j);
    double s = 0.0;
    for (int i = j; i <= k; ++i) s += c[i - j] * beta[i - 1];
    alpha[j - 1] = s;
  }
  return alpha;
}

/// Expands per-cardinality values v[|T|-1] to a lattice array (entry 0 = at_empty).
inline std::vector<double> symmetric_lattice(const std::vector<double>& v, double at_empty) {
  const int k = static_cast<int>(v.size());
  std::vector<double> out(lattice_size(k));
  out[0] = at_empty;
  for (Subset t = 1; t < out.size(); ++t) out[t] = v[cardinality(t) - 1];
  return out;
}

/// Density profile rho(T) = alpha_{|T|} * scale.
inline DensityProfile symmetric_profile(const std::vector<double>& alpha, double scale) {
  std::vector<double> v(alpha);
  for (double& x : v) x *= scale;
  return make_density_profile(static_cast<int>(alpha.size()), symmetric_lattice(v, 1.0));
}

/// Normalising scale log d / d of intersection densities.
inline double alpha_scale(double d) {
  require(d > 1.0, "alpha scale needs degree > 1");
  return std::log(d) / d;
}

/// s_k(x) = 1 + (1-x) + ... + (1-x)^{k-1}; equals (1 - (1-x)^k) / x for x > 0.
inline double s_k(double x, int k) {
  require(x >= 0.0 && x <= 1.0, "s_k needs 0 <= x <= 1");
  require(k >= 1, "s_k needs k >= 1");
  double sum = 0.0, term = 1.0;
  for (int j = 0; j < k; ++j) {
    sum += term;
    term *= 1.0 - x;
  }
  return sum;
}

/// sum_{i=1}^k (-1)^{i-1} C(k,i) alpha_i (2 - alpha_i).
inline double binom_sum(const std::vector<double>& alpha) {
  const int k = static_cast<int>(alpha.size());
  const auto c = binomial_row(k);
  double s = 0.0;
  for (int i = 1; i <= k; ++i)
    s += ((i - 1) % 2 ? -1.0 : 1.0) * c[i] * alpha[i - 1] * (2.0 - alpha[i - 1]);
  return s;
}

/// 2 sum_{T != empty} beta(T) - sum_{T cap T' != empty} beta(T) beta(T') for
/// a lattice array beta (entry 0 ignored).
inline double beta_quadratic(const std::vector<double>& beta) {
  std::vector<double> b = beta;
  b[0] = 0.0;
  double total = 0.0;
  for (double x : b) total += x;
  std::vector<double> below = b;
  subset_zeta(below);
  const Subset full = static_cast<Subset>(b.size() - 1);
  double disjoint = 0.0;
  for (Subset t = 1; t < b.size(); ++t) disjoint += b[t] * below[full & ~t];
  return 2.0 * total - (total * total - disjoint);
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

struct Entropies {
  double h_pi = 0.0;   // H(pi)
  double h_m = 0.0;    // H(M), 0 when no edge profile is given
  double h_hat = 0.0;  // sum_T pi(T) log w(T), never positive
};

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) h -= xlogx(x);
  return h;
}

inline double weighted_log_weight(const PartitionMeasure& pi) {
  const auto w = disjoint_weights(pi);
  double s = 0.0;
  for (Subset t = 0; t < w.size(); ++t)
    if (pi.pi[t] > 0.0) s += pi.pi[t] * std::log(w[t]);
  return s;
}

inline Entropies entropies(const PartitionMeasure& pi) {
  return {entropy(pi.pi), 0.0, weighted_log_weight(pi)};
}

/// Row marginal of M.
inline PartitionMeasure marginal(const EdgeProfile& m) {
  const std::size_t c = m.cells();
  std::vector<double> pi(c, 0.0);
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t b = 0; b < c; ++b) pi[a] += m.m[a * c + b];
  return {m.k, std::move(pi)};
}

/// Checks symmetry, non-negativity, total mass 1 and the support condition
/// M(T,T') = 0 whenever T and T' intersect.
inline void validate_edge_profile(const EdgeProfile& m, double tol = 1e-12) {
  const std::size_t c = lattice_size(m.k);
  require(m.m.size() == c * c, "edge profile needs 4^k entries");
  double total = 0.0;
  for (Subset a = 0; a < c; ++a)
    for (Subset b = 0; b < c; ++b) {
      const double x = m(a, b);
      require(x >= -tol, "edge profile has a negative entry");
      require(std::abs(x - m(b, a)) <= tol, "edge profile is not symmetric");
      if (a & b) require(std::abs(x) <= tol, "edge profile puts mass on intersecting cells");
      total += x;
    }
  require(std::abs(total - 1.0) <= 1e-9, "edge profile must sum to 1");
}

inline Entropies entropies(const EdgeProfile& m) {
  Entropies e = entropies(marginal(m));
  e.h_m = entropy(m.m);
  return e;
}

/// 2H(pi) + sum pi log w - H(M) for the marginal pi of M; non-negative by
/// Jensen's inequality.
inline double max_entropy_check(const EdgeProfile& m) {
  validate_edge_profile(m);
  const Entropies e = entropies(m);
  const double residual = 2.0 * e.h_pi + e.h_hat - e.h_m;
  if (residual < -1e-12)
    throw NumericalError("edge profile entropy exceeds the bound by " + std::to_string(-residual));
  return residual;
}

/// M(T,T') = pi(T) pi(T') / w(T') on disjoint pairs. This is a valid edge
/// profile with marginal pi exactly when w is constant on the support of pi,
/// and then it attains the entropy bound with equality.
inline EdgeProfile jensen_equality_profile(const PartitionMeasure& pi, double tol = 1e-12) {
  const auto w = disjoint_weights(pi);
  double level = -1.0;
  for (Subset t = 0; t < w.size(); ++t) {
    if (pi.pi[t] <= 0.0) continue;
    if (level < 0.0) level = w[t];
    require(std::abs(w[t] - level) <= tol,
            "equality profile needs w constant on the support of pi");
  }
  EdgeProfile m{pi.k, std::vector<double>(w.size() * w.size(), 0.0)};
  for (Subset a = 0; a < w.size(); ++a)
    for (Subset b = 0; b < w.size(); ++b)
      if (!(a & b) && pi.pi[a] > 0.0 && pi.pi[b] > 0.0) m(a, b) = pi.pi[a] * pi.pi[b] / level;
  return m;
}

/// H(pi) + (d/2) sum pi log w: bound on the exponential growth rate of the
/// expected number of k-tuples of independent sets with partition measure
/// pi. Dominates (d/2)H(M) - (d-1)H(pi) for every edge profile M with
/// marginal pi.
inline double rate_bound(const PartitionMeasure& pi, double d) {
  require(d > 0.0, "degree must be positive");
  return entropy(pi.pi) + 0.5 * d * weighted_log_weight(pi);
}

/// (d/2) H(M) - (d-1) H(pi) for an edge profile with marginal pi.
inline double edge_profile_rate(const EdgeProfile& m, double d) {
  const Entropies e = entropies(m);
  return 0.5 * d * e.h_m - (d - 1.0) * e.h_pi;
}

struct AsymptoticRate {
  double leading = 0.0;    // binom_sum(alpha) log^2 d / (2d)
  double gap = 0.0;        // rate_bound - leading
  double budget = 0.0;     // C_k log d / d
  double constant = 0.0;   // C_k
};

/// C_k = 2k + (2^k - 1)/e bounds the O_k(log d / d) remainder for every
/// valid symmetric profile with alpha_1 <= 2 and d >= 3: H(pi) exceeds its
/// leading part by at most (log d/d)(sum beta + (2^k-1)/e) since
/// -b log b <= 1/e, sum beta <= k alpha_1, and log(1-y) <= -y handles w.
inline double asymptotic_constant(int k) {
  return 2.0 * k + (std::ldexp(1.0, k) - 1.0) / std::exp(1.0);
}

inline AsymptoticRate asymptotic_rate(const std::vector<double>& alpha, double d) {
  require(!alpha.empty(), "need at least one alpha value");
  require(d >= 3.0, "asymptotic rate needs d >= 3");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    require(alpha[i] >= 0.0 && alpha[i] <= 2.0, "alpha values must lie in [0, 2]");
    require(i == 0 || alpha[i] <= alpha[i - 1], "alpha values must be non-increasing");
  }
  const double scale = alpha_scale(d);
  const PartitionMeasure pi = rho_to_pi(symmetric_profile(alpha, scale));
  AsymptoticRate r;
  const double log_d = std::log(d);
  r.leading = binom_sum(alpha) * log_d * log_d / (2.0 * d);
  r.gap = rate_bound(pi, d) - r.leading;
  r.constant = asymptotic_constant(static_cast<int>(alpha.size()));
  r.budget = r.constant * scale;
  if (r.gap > r.budget + 1e-12)
    throw NumericalError("rate gap exceeds the O(log d / d) budget");
  return r;
}

inline nlohmann::json to_json(const DensityProfile& p) {
  nlohmann::json rho = nlohmann::json::object();
  for (Subset t = 0; t < p.rho.size(); ++t) rho[std::to_string(t)] = p.rho[t];
  return {{"k", p.k}, {"rho", std::move(rho)}};
}

/// Reads {k, rho: {bitmask: value}}; missing masks are an error.
inline DensityProfile density_profile_from_json(const nlohmann::json& j) {
  const int k = j.at("k").get<int>();
  std::vector<double> rho(lattice_size(k));
  const auto& cells = j.at("rho");
  for (Subset t = 0; t < rho.size(); ++t) {
    const std::string key = std::to_string(t);
    require(cells.contains(key), "density profile missing mask " + key);
    rho[t] = cells.at(key).get<double>();
  }
  return make_density_profile(k, std::move(rho));
}

}  // namespace fiid
