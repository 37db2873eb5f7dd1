#pragma once

// Factors: deterministic local rules from a labelled rooted neighbourhood to
// a bit. Included: the Lauer-Wormald percolation construction, the greedy
// "local minimum" rule and the constant-zero rule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fiid/errors.hpp"
#include "fiid/neighborhood.hpp"
#include "fiid/rng.hpp"
#include "json.hpp"

namespace fiid {

enum class FactorKind { lauer_wormald, greedy_threshold, custom };

inline const char* to_string(FactorKind k) {
  switch (k) {
    case FactorKind::lauer_wormald: return "lauer-wormald";
    case FactorKind::greedy_threshold: return "greedy-threshold";
    default: return "custom";
  }
}

class Factor {
 public:
  using Rule = std::function<bool(const NeighborhoodView&)>;

  Factor(FactorKind kind, int radius, nlohmann::json params, Rule rule)
      : kind_(kind), radius_(radius), params_(std::move(params)), rule_(std::move(rule)) {
    require(radius >= 0, "factor radius must be non-negative");
  }

  FactorKind kind() const noexcept { return kind_; }
  int radius() const noexcept { return radius_; }
  const nlohmann::json& params() const noexcept { return params_; }

  /// Runs the rule directly on `nb`, trusting it to stay within radius().
  bool rule(const NeighborhoodView& nb) const { return rule_(nb); }

 private:
  FactorKind kind_;
  int radius_;
  nlohmann::json params_;
  Rule rule_;
};

/// Hides every vertex deeper than `limit` in the wrapped view.
class RadiusLimitedView final : public NeighborhoodView {
 public:
  RadiusLimitedView(const NeighborhoodView& base, int limit) : base_(base), limit_(limit) {}

  LocalId root() const override { return base_.root(); }
  int radius() const override { return limit_; }

  std::size_t degree(LocalId v) const override {
    if (base_.depth(v) < limit_) return base_.degree(v);
    std::size_t count = 0;
    for (std::size_t i = 0; i < base_.degree(v); ++i)
      if (base_.depth(base_.neighbor(v, i)) <= limit_) ++count;
    return count;
  }

  LocalId neighbor(LocalId v, std::size_t i) const override {
    if (base_.depth(v) < limit_) return base_.neighbor(v, i);
    for (std::size_t j = 0; j < base_.degree(v); ++j) {
      const LocalId w = base_.neighbor(v, j);
      if (base_.depth(w) <= limit_ && i-- == 0) return w;
    }
    throw InputError("neighbour index out of range");
  }

  Label label(LocalId v) const override { return base_.label(v); }
  int depth(LocalId v) const override { return base_.depth(v); }

 private:
  const NeighborhoodView& base_;
  int limit_;
};

/// f applied to nb truncated to f's radius.
inline bool apply_factor(const Factor& f, const NeighborhoodView& nb) {
  require(nb.radius() >= f.radius(), "neighbourhood radius smaller than factor radius");
  if (nb.radius() == f.radius()) return f.rule(nb);
  return f.rule(RadiusLimitedView(nb, f.radius()));
}

inline Factor constant_zero() {
  return Factor(FactorKind::custom, 0, nlohmann::json{{"name", "zero"}},
                [](const NeighborhoodView&) { return false; });
}

/// Root joins iff its label is smaller than every neighbour's label. A loop
/// makes the root its own neighbour, so a looped root never joins.
inline Factor greedy_threshold() {
  return Factor(FactorKind::greedy_threshold, 1, nlohmann::json::object(),
                [](const NeighborhoodView& nb) {
                  const LocalId r = nb.root();
                  const Label own = nb.label(r);
                  for (std::size_t i = 0; i < nb.degree(r); ++i)
                    if (!(own < nb.label(nb.neighbor(r, i)))) return false;
                  return true;
                });
}

namespace detail {

// Evaluates the Lauer-Wormald rounds at the root. Only the first round in
// which a vertex passes its Bernoulli(p) trial matters: it enters S_j1 then
// if still undecided, and otherwise never enters. Hence v is in I' iff
// j1(v) <= k and no neighbour w with j1(w) < j1(v) is in I'.
class LauerWormaldEval {
 public:
  LauerWormaldEval(const NeighborhoodView& nb, double p, std::uint64_t k) : nb_(nb), p_(p), k_(k) {}

  bool root_output() {
    const LocalId r = nb_.root();
    if (!in_first_stage(r)) return false;
    const std::uint64_t j = round(r);
    for (std::size_t i = 0; i < nb_.degree(r); ++i) {
      const LocalId w = nb_.neighbor(r, i);
      if (round(w) == j && in_first_stage(w)) return false;
    }
    return true;
  }

 private:
  enum : std::int8_t { kUnknown = 0, kIn = 1, kOut = 2 };

  std::uint64_t round(LocalId v) { return first_success(nb_.label(v).unit(), p_); }

  bool in_first_stage(LocalId v) {
    if (v >= state_.size()) state_.resize(std::max<std::size_t>(v + 1, 2 * state_.size()), kUnknown);
    if (state_[v] != kUnknown) return state_[v] == kIn;
    const std::uint64_t j = round(v);
    bool in = j <= k_;
    if (in) {
      // Earliest rounds first: they are the likeliest to be in and the
      // cheapest to decide, so the scan usually stops after one or two.
      std::vector<std::pair<std::uint64_t, LocalId>> earlier;
      for (std::size_t i = 0; i < nb_.degree(v); ++i) {
        const LocalId w = nb_.neighbor(v, i);
        const std::uint64_t jw = round(w);
        if (jw < j) earlier.emplace_back(jw, w);
      }
      std::sort(earlier.begin(), earlier.end());
      for (const auto& [jw, w] : earlier)
        if (in_first_stage(w)) {
          in = false;
          break;
        }
    }
    if (v >= state_.size()) state_.resize(v + 1, kUnknown);
    state_[v] = in ? kIn : kOut;
    return in;
  }

  const NeighborhoodView& nb_;
  double p_;
  std::uint64_t k_;
  std::vector<std::int8_t> state_;
};

}  // namespace detail

/// k rounds of Bernoulli(p) selection among undecided vertices; selected
/// vertices and their neighbours leave the undecided set; finally every
/// selected vertex with a selected neighbour is dropped. Reads at most k
/// steps from the root, declared radius k + 1.
inline Factor lauer_wormald(double p, int k) {
  require(p > 0.0 && p < 1.0, "lauer-wormald needs 0 < p < 1");
  require(k >= 1, "lauer-wormald needs k >= 1");
  return Factor(FactorKind::lauer_wormald, k + 1, nlohmann::json{{"p", p}, {"k", k}},
                [p, k](const NeighborhoodView& nb) {
                  return detail::LauerWormaldEval(nb, p, static_cast<std::uint64_t>(k))
                      .root_output();
                });
}

struct BetaBracket {
  double value;
  double lower;
  double upper;
};

/// Limit density (1 - (d-1)^(-2/(d-2))) / 2 of the Lauer-Wormald sets on T_d,
/// with the bracket a - 2a^2 <= value <= a for a = log(d-1)/(d-2).
inline BetaBracket beta_formula(int d) {
  require(d >= 3, "beta formula needs d >= 3");
  const double dm1 = d - 1.0, dm2 = d - 2.0;
  const double value = 0.5 * -std::expm1(-2.0 * std::log(dm1) / dm2);
  const double a = std::log(dm1) / dm2;
  BetaBracket b{value, a - 2.0 * a * a, a};
  if (!(b.lower <= b.value && b.value <= b.upper))
    throw NumericalError("beta bracket violated at d=" + std::to_string(d));
  return b;
}

inline nlohmann::json to_json(const Factor& f) {
  return {{"kind", to_string(f.kind())}, {"radius", f.radius()}, {"params", f.params()}};
}

inline Factor factor_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lauer-wormald") {
    const auto& p = j.at("params");
    return lauer_wormald(p.at("p").get<double>(), p.at("k").get<int>());
  }
  if (kind == "greedy-threshold") return greedy_threshold();
  if (kind == "custom" && j.value("params", nlohmann::json::object()).value("name", "") == "zero")
    return constant_zero();
  throw InputError("unknown factor kind: " + kind);
}

}  // namespace fiid
