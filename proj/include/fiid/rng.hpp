#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of a 64-bit seed and a tuple of integer coordinates (stream tag,
// trial, copy, vertex, ...), so results never depend on evaluation order or
// on how trials are distributed over threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fiid {

using Seed = std::uint64_t;

/// Finalizer of the SplitMix64 generator; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

/// Independent-looking 64-bit word addressed by (seed, parts...).
template <class... Parts>
constexpr std::uint64_t derive(Seed seed, Parts... parts) noexcept {
  std::uint64_t h = splitmix64(seed);
  ((h = combine(h, static_cast<std::uint64_t>(parts))), ...);
  return h;
}

/// Stream tags keep unrelated uses of one seed apart.
enum class Stream : std::uint64_t {
  graph = 1,
  labels,
  percolation,
  tree,
  resample,
  root,
  filling,
  check,
  inner,
};

/// Maps a word to a double in [0,1) using its top 53 bits.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential engine for the few places that need a stream of draws
/// (shuffles, skip sampling). Seed it with derive(...).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return unit_interval((*this)()); }

  /// Uniform integer in [0, n) by Lemire's multiply-and-reject method.
  std::uint64_t bounded(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Index of the first success in i.i.d. Bernoulli(p) trials 1, 2, 3, ...
/// obtained by inverting the geometric tail P(first > j) = (1-p)^j at u.
inline std::uint64_t first_success(double u, double p) noexcept {
  if (p >= 1.0) return 1;
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double skipped = std::floor(std::log1p(-u) / std::log1p(-p));
  if (!(skipped < 9.0e18)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(skipped) + 1;
}

/// Poisson(lambda) sampling by table inversion, so a draw is a pure
/// function of one uniform.
class PoissonTable {
 public:
  static constexpr double kMaxMean = 700.0;

  explicit PoissonTable(double mean) : mean_(mean) {
    if (!(mean >= 0.0) || mean > kMaxMean)
      throw std::invalid_argument("Poisson mean must lie in [0, 700]");
    double pmf = std::exp(-mean);
    double cdf = pmf;
    cdf_.push_back(cdf);
    for (std::uint64_t j = 1;; ++j) {
      pmf *= mean / static_cast<double>(j);
      cdf += pmf;
      cdf_.push_back(cdf);
      if (static_cast<double>(j) > mean && (pmf < 1e-300 || cdf >= 1.0 - 0x1.0p-60)) break;
    }
  }

  double mean() const noexcept { return mean_; }

  std::uint64_t operator()(double u) const noexcept {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin());
  }

  /// P(Poisson <= j), computed from the table.
  double cdf(std::uint64_t j) const noexcept {
    return j < cdf_.size() ? cdf_[j] : 1.0;
  }

 private:
  double mean_;
  std::vector<double> cdf_;
};

}  // namespace fiid
