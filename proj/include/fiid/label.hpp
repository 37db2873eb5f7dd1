#pragma once

#include <compare>
#include <cstdint>

#include "fiid/rng.hpp"

namespace fiid {

/// A vertex label: 64 uniform bits read as the dyadic rational bits / 2^64,
/// paired with the id of the vertex carrying it. Comparison is
/// lexicographic on (bits, origin), so two labels never tie.
struct Label {
  std::uint64_t bits = 0;
  std::uint64_t origin = 0;

  double unit() const noexcept { return unit_interval(bits); }

  friend constexpr auto operator<=>(const Label&, const Label&) = default;
};

/// Label of vertex `vertex` in labelling number `copy` of trial `trial`.
inline Label draw_label(Seed seed, std::uint64_t trial, std::uint64_t copy,
                        std::uint64_t vertex) noexcept {
  return Label{derive(seed, Stream::labels, trial, copy, vertex), vertex};
}

}  // namespace fiid
