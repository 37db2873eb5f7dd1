#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace fiid {

/// Monte Carlo mean with the standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of a sample, summed in index order.
inline MeanEstimate estimate_mean(std::span<const double> xs) {
  MeanEstimate e;
  e.count = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return e;
}

/// Same for 0/1 outcomes given as a success count.
inline MeanEstimate estimate_proportion(std::uint64_t successes, std::uint64_t trials) {
  MeanEstimate e;
  e.count = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  e.mean = static_cast<double>(successes) / n;
  if (trials > 1) e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / (n - 1.0));
  return e;
}

/// Standard error of a difference of independent estimates.
inline double combined_stderr(const MeanEstimate& a, const MeanEstimate& b) noexcept {
  return std::hypot(a.std_error, b.std_error);
}

}  // namespace fiid
