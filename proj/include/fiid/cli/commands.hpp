#pragma once

// The experiments behind the fiid tool. Every command turns a flat JSON
// parameter object into a table; run_command renders it and builds the
// manifest that replay feeds back in.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fiid/counting.hpp"
#include "fiid/coupling.hpp"
#include "fiid/errors.hpp"
#include "fiid/factor.hpp"
#include "fiid/io.hpp"
#include "fiid/pgw_transfer.hpp"
#include "fiid/profiles.hpp"
#include "fiid/projection.hpp"

namespace fiid::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// --- spec strings -------------------------------------------------------

/// "kind:key=value,key=value" split into its parts.
struct SpecString {
  std::string kind;
  std::map<std::string, std::string> values;
};

inline SpecString parse_spec(const std::string& text, const std::string& field) {
  SpecString out;
  const auto colon = text.find(':');
  out.kind = text.substr(0, colon);
  if (out.kind.empty()) throw InputError(field + ": missing kind in '" + text + "'");
  if (colon == std::string::npos) return out;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InputError(field + ": expected key=value, got '" + item + "'");
    out.values[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

namespace detail {

inline void only_keys(const SpecString& s, const std::vector<std::string>& allowed, const std::string& field) {
  for (const auto& [key, value] : s.values)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(field + "." + key + ": unknown field for " + s.kind);
}

inline const std::string& value_of(const SpecString& s, const std::string& key, const std::string& field) {
  const auto it = s.values.find(key);
  if (it == s.values.end()) throw InputError(field + "." + key + ": required for " + s.kind);
  return it->second;
}

inline double number(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(x))
    throw InputError(field + ": expected a number, got '" + text + "'");
  return x;
}

inline std::int64_t whole(const std::string& text, const std::string& field) {
  const double x = number(text, field);
  if (x != std::floor(x) || std::abs(x) > 9e15) throw InputError(field + ": expected an integer, got '" + text + "'");
  return static_cast<std::int64_t>(x);
}

inline double spec_number(const SpecString& s, const std::string& key, const std::string& field) {
  return number(value_of(s, key, field), field + "." + key);
}

inline std::int64_t spec_whole(const SpecString& s, const std::string& key, const std::string& field) {
  return whole(value_of(s, key, field), field + "." + key);
}

}  // namespace detail

/// lw:p=..,k=.. | threshold | zero
inline Factor parse_factor(const std::string& text) {
  const SpecString s = parse_spec(text, "factor");
  if (s.kind == "lw") {
    detail::only_keys(s, {"p", "k"}, "factor");
    const double p = detail::spec_number(s, "p", "factor");
    const auto k = detail::spec_whole(s, "k", "factor");
    if (!(p > 0.0 && p < 1.0)) throw InputError("factor.p: must lie in (0, 1)");
    if (k < 1 || k > 1000000) throw InputError("factor.k: must lie in [1, 10^6]");
    return lauer_wormald(p, static_cast<int>(k));
  }
  detail::only_keys(s, {}, "factor");
  if (s.kind == "threshold") return greedy_threshold();
  if (s.kind == "zero") return constant_zero();
  throw InputError("factor: unknown kind '" + s.kind + "' (expected lw, threshold or zero)");
}

/// tree:d=.. | pgw:lambda=.. | config:n=..,d=.. | er:n=..,lambda=..
inline HostSpec parse_host(const std::string& text) {
  const SpecString s = parse_spec(text, "host");
  auto degree = [&] {
    const auto d = detail::spec_whole(s, "d", "host");
    if (d < 1 || d > 100000) throw InputError("host.d: must lie in [1, 10^5]");
    return static_cast<int>(d);
  };
  auto size = [&] {
    const auto n = detail::spec_whole(s, "n", "host");
    if (n < 1) throw InputError("host.n: must be positive");
    return static_cast<std::size_t>(n);
  };
  auto mean = [&] {
    const double lambda = detail::spec_number(s, "lambda", "host");
    if (!(lambda > 0.0)) throw InputError("host.lambda: must be positive");
    return lambda;
  };
  if (s.kind == "tree") {
    detail::only_keys(s, {"d"}, "host");
    const int d = degree();
    if (d < 2) throw InputError("host.d: tree host needs d >= 2");
    return HostSpec::regular_tree(d);
  }
  if (s.kind == "pgw") {
    detail::only_keys(s, {"lambda"}, "host");
    return HostSpec::pgw_tree(mean());
  }
  if (s.kind == "config") {
    detail::only_keys(s, {"n", "d"}, "host");
    const auto n = size();
    const int d = degree();
    if ((n * static_cast<std::size_t>(d)) % 2 != 0) throw InputError("host: config model needs n*d even");
    return HostSpec::config(n, d);
  }
  if (s.kind == "er") {
    detail::only_keys(s, {"n", "lambda"}, "host");
    const auto n = size();
    const double lambda = mean();
    if (lambda > static_cast<double>(n)) throw InputError("host.lambda: must not exceed n");
    return HostSpec::er(n, lambda);
  }
  throw InputError("host: unknown kind '" + s.kind + "' (expected tree, pgw, config or er)");
}

/// Comma separated numbers.
inline std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(detail::number(item, field));
  if (out.empty()) throw InputError(field + ": empty list");
  return out;
}

// --- parameters ---------------------------------------------------------

namespace detail {

template <class T>
T param(const nlohmann::json& p, const char* key) {
  try {
    return p.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string(key) + ": missing or of the wrong type");
  }
}

inline std::uint64_t trials(const nlohmann::json& p, const char* key = "trials") {
  const auto t = param<std::uint64_t>(p, key);
  if (t < 1) throw InputError(std::string(key) + ": must be at least 1");
  return t;
}

inline unsigned workers(const nlohmann::json& p) {
  const auto w = param<std::uint64_t>(p, "workers");
  if (w < 1 || w > 1024) throw InputError("workers: must lie in [1, 1024]");
  return static_cast<unsigned>(w);
}

inline std::int64_t host_n(const HostSpec& h) { return static_cast<std::int64_t>(h.n); }

}  // namespace detail

inline Table cmd_density(const nlohmann::json& p) {
  const auto factor_text = detail::param<std::string>(p, "factor");
  const auto host_text = detail::param<std::string>(p, "host");
  const Factor f = parse_factor(factor_text);
  const HostSpec host = parse_host(host_text);
  const auto trials = detail::trials(p);
  const auto seed = detail::param<std::uint64_t>(p, "seed");
  const unsigned workers = detail::workers(p);

  MeanEstimate est;
  if (host.is_tree()) {
    est = estimate_tree_density(f, host.shape(), trials, seed, workers);
  } else {
    std::vector<double> xs(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
      const MultiGraph g = sample_host_graph(host, seed, t);
      xs[t] = project_to_graph(f, g, draw_labels(g.size(), seed, t)).density();
    });
    est = estimate_mean(xs);
  }
  Table table{{"host", "kind", "params", "trials", "mean", "stderr", "seed"}, {}};
  table.add({host_text, to_string(f.kind()), f.params().dump(), trials, est.mean, est.std_error, seed});
  return table;
}

namespace detail {

inline CouplingConfig coupling_config(const nlohmann::json& p, int k) {
  CouplingConfig cfg;
  cfg.factor = parse_factor(param<std::string>(p, "factor"));
  cfg.host = parse_host(param<std::string>(p, "host"));
  cfg.k = k;
  cfg.trials = trials(p);
  cfg.inner_trials = trials(p, "inner_trials");
  cfg.seed = param<std::uint64_t>(p, "seed");
  cfg.workers = workers(p);
  return cfg;
}

}  // namespace detail

inline Table cmd_scan_p(const nlohmann::json& p) {
  const auto k = detail::param<std::int64_t>(p, "k");
  if (k < 1 || k > kMaxProfileK) throw InputError("k: must lie in [1, 20]");
  const CouplingConfig cfg = detail::coupling_config(p, static_cast<int>(k));
  const auto grid = parse_list(detail::param<std::string>(p, "grid"), "grid");
  for (double x : grid)
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("grid: points must lie in [0, 1]");
  const bool stability = detail::param<bool>(p, "stability");
  const ScanReport report = scan_p(cfg, grid, stability);

  Table table{{"host", "factor", "degree", "n", "p", "k", "quantity", "i", "mean", "stderr", "trials", "seed"}, {}};
  const std::string host = cfg.host.name(), factor = to_string(cfg.factor.kind());
  const double degree = cfg.host.degree_param();
  const std::int64_t n = detail::host_n(cfg.host);
  for (const ScanRow& row : report.rows) {
    for (int i = 1; i <= cfg.k; ++i) {
      const MeanEstimate& e = row.intersections.prefix[static_cast<std::size_t>(i - 1)];
      table.add({host, factor, degree, n, row.p, k, std::string("intersection"), std::int64_t{i}, e.mean,
                 e.std_error, cfg.trials, cfg.seed});
    }
    for (std::size_t j = 0; j < row.moments.size(); ++j) {
      const MeanEstimate& e = row.moments[j].conditional;
      table.add({host, factor, degree, n, row.p, k, std::string("stability-moment"),
                 static_cast<std::int64_t>(j + 1), e.mean, e.std_error, cfg.trials, cfg.seed});
    }
    if (row.binom2)
      table.add({host, factor, degree, n, row.p, k, std::string("binom-sum"), std::int64_t{2}, *row.binom2,
                 std::monostate{}, cfg.trials, cfg.seed});
    if (row.binom3)
      table.add({host, factor, degree, n, row.p, k, std::string("binom-sum"), std::int64_t{3}, *row.binom3,
                 std::monostate{}, cfg.trials, cfg.seed});
  }
  return table;
}

inline Table cmd_stability(const nlohmann::json& p) {
  CouplingConfig cfg = detail::coupling_config(p, 1);
  cfg.p = detail::param<double>(p, "p");
  if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw InputError("p: must lie in [0, 1]");
  const auto orders = parse_list(detail::param<std::string>(p, "moments"), "moments");
  for (double m : orders)
    if (!(m >= 0.0)) throw InputError("moments: orders must be non-negative");
  const StabilityEstimate est = estimate_stability(cfg, orders);

  Table table{{"host", "factor", "degree", "n", "p", "quantity", "m", "mean", "stderr", "accepted", "trials",
               "inner_trials", "seed"},
              {}};
  const std::string host = cfg.host.name(), factor = to_string(cfg.factor.kind());
  const double degree = cfg.host.degree_param();
  const std::int64_t n = detail::host_n(cfg.host);
  auto add = [&](const std::string& what, Cell m, const MeanEstimate& e) {
    table.add({host, factor, degree, n, cfg.p, what, m, e.mean, e.std_error, est.accepted, cfg.trials,
               cfg.inner_trials, cfg.seed});
  };
  add("density", std::monostate{}, est.density);
  for (const MomentEstimate& m : est.moments) {
    add("conditional-moment", m.m, m.conditional);
    add("joint-moment", m.m, m.joint);
  }
  return table;
}

namespace detail {

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline constexpr double kOracleTolerance = 1e-9;

}  // namespace detail

inline Table cmd_bounds(const nlohmann::json& p) {
  const auto rho_text = detail::param<std::string>(p, "rho");
  const auto alpha_text = detail::param<std::string>(p, "alpha");
  const auto n_raw = detail::param<std::int64_t>(p, "n");
  const auto d_raw = detail::param<std::int64_t>(p, "d");
  const double lambda = detail::param<double>(p, "lambda");
  const bool self_test = detail::param<bool>(p, "self_test");
  if (n_raw < 0) throw InputError("n: must be non-negative");
  if (d_raw < 0) throw InputError("d: must be non-negative");
  if (!(lambda >= 0.0)) throw InputError("lambda: must be non-negative");
  if (rho_text.empty() == alpha_text.empty()) throw InputError("bounds: give exactly one of rho or alpha");
  const auto n = static_cast<std::size_t>(n_raw);
  const int d = static_cast<int>(d_raw);

  Table table{{"n", "degree", "k", "description", "value"}, {}};
  const double degree = d > 0 ? static_cast<double>(d) : lambda;
  auto add = [&](int k, const std::string& what, double value) {
    table.add({n_raw, degree, std::int64_t{k}, what, value});
  };

  if (!alpha_text.empty()) {
    const auto alpha = parse_list(alpha_text, "alpha");
    if (d < 3) throw InputError("d: asymptotic rate needs d >= 3");
    const int k = static_cast<int>(alpha.size());
    const AsymptoticRate r = asymptotic_rate(alpha, d);
    add(k, "binomial sum", binom_sum(alpha));
    add(k, "leading term", r.leading);
    add(k, "rate bound minus leading term", r.gap);
    add(k, "constant C_k", r.constant);
    add(k, "budget C_k log(d)/d", r.budget);
    return table;
  }

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(rho_text);
  } catch (const nlohmann::json::exception&) {
    throw InputError("rho: not valid JSON");
  }
  DensityProfile rho;
  try {
    rho = density_profile_from_json(parsed);
  } catch (const nlohmann::json::exception&) {
    throw InputError("rho: expected {\"k\": int, \"rho\": {mask: value}}");
  }
  const PartitionMeasure pi = rho_to_pi(rho);
  const Entropies e = entropies(pi);
  add(rho.k, "entropy H(pi)", e.h_pi);
  add(rho.k, "weighted log weight sum pi log w", e.h_hat);
  if (d > 0) add(rho.k, "rate bound", rate_bound(pi, d));
  if (n > 0 && d > 0) add(rho.k, "log expected count (configuration model)", log_expected_Z_total(rho, n, d));
  if (n > 0 && lambda > 0.0) add(rho.k, "log expected count bound (ER)", er_log_expected_Z(rho, n, lambda));
  if (self_test) {
    if (n == 0 || d == 0) throw InputError("self_test: needs n and d");
    if (n * static_cast<std::size_t>(d) > 14) throw InputError("self_test: needs n*d <= 14 to enumerate pairings");
    const double brute = config_mean_Z(n, d, rho);
    const double formula = std::exp(log_expected_Z_total(rho, n, d));
    const double err = detail::relative_error(brute, formula);
    add(rho.k, "self-test mean over all pairings", brute);
    add(rho.k, "self-test formula", formula);
    add(rho.k, "self-test relative error", err);
    if (err > detail::kOracleTolerance) throw NumericalError("self-test failed: relative error " + format_double(err));
  }
  return table;
}

inline Table cmd_oracle_check(const nlohmann::json& p) {
  const auto cases_text = detail::param<std::string>(p, "cases");
  Table table{{"n", "d", "size", "brute_force_mean", "formula", "relative_error", "ok"}, {}};
  std::stringstream in(cases_text);
  std::string item;
  bool all_ok = true;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InputError("cases: expected n:d, got '" + item + "'");
    const auto n = detail::whole(item.substr(0, colon), "cases.n");
    const auto d = detail::whole(item.substr(colon + 1), "cases.d");
    if (n < 1 || d < 1 || n * d > 14) throw InputError("cases: need n, d >= 1 and n*d <= 14, got '" + item + "'");
    const auto nn = static_cast<std::size_t>(n);
    for (std::int64_t size = 0; size <= n; ++size) {
      const DensityProfile rho =
          make_density_profile(1, {1.0, static_cast<double>(size) / static_cast<double>(n)});
      const double brute = config_mean_Z(nn, static_cast<int>(d), rho);
      const double formula = std::exp(log_expected_Z_total(rho, nn, static_cast<int>(d)));
      const double err = detail::relative_error(brute, formula);
      const bool ok = err <= detail::kOracleTolerance;
      all_ok = all_ok && ok;
      table.add({n, d, size, brute, formula, err, ok});
    }
  }
  if (table.rows.empty()) throw InputError("cases: empty list");
  if (!all_ok) throw NumericalError("oracle check failed:\n" + to_csv(table));
  return table;
}

inline Table cmd_pgw_transfer(const nlohmann::json& p) {
  const Factor f = parse_factor(detail::param<std::string>(p, "factor"));
  const double lambda = detail::param<double>(p, "lambda");
  if (!(lambda > 0.0)) throw InputError("lambda: must be positive");
  const auto d_raw = detail::param<std::int64_t>(p, "d");
  const double u = detail::param<double>(p, "u");
  int d = 0;
  if (d_raw == 0) {
    if (!(u > 0.5 && u < 1.0)) throw InputError("u: schedule exponent must lie in (1/2, 1)");
    d = schedule_degree(lambda, u);
  } else {
    if (d_raw < 3 || d_raw > 100000) throw InputError("d: must lie in [3, 10^5]");
    d = static_cast<int>(d_raw);
  }
  const auto trials = detail::trials(p);
  const auto seed = detail::param<std::uint64_t>(p, "seed");
  const TransferReport r = transfer_density(f, lambda, d, trials, seed, detail::workers(p));
  const double sigma_e = std::sqrt(r.event_e_exact * (1.0 - r.event_e_exact) / static_cast<double>(trials));
  const bool agree = std::abs(r.event_e_mc.mean - r.event_e_exact) <= 3.0 * sigma_e + 1e-15;

  Table table{{"lambda", "d", "trials", "density_J", "stderr", "density_I", "P_E_exact", "lower", "upper", "seed",
               "density_I_stderr", "P_E_mc", "P_E_mc_stderr", "P_E_agree", "sandwich"},
              {}};
  table.add({lambda, std::int64_t{d}, trials, r.density_j.mean, r.density_j.std_error, r.density_i.mean,
             r.event_e_exact, r.lower, r.upper, seed, r.density_i.std_error, r.event_e_mc.mean,
             r.event_e_mc.std_error, agree, r.sandwich_holds});
  return table;
}

// --- registry, manifests and replay ------------------------------------

struct Command {
  std::string name;
  std::string help;
  /// Every parameter with its default; the JSON type fixes the flag type.
  nlohmann::json defaults;
  std::function<Table(const nlohmann::json&)> run;
};

inline nlohmann::json common_defaults() {
  return {{"seed", std::uint64_t{1}},
          {"trials", std::uint64_t{1000}},
          {"workers", std::uint64_t{1}},
          {"out", ""},
          {"format", "csv"}};
}

inline const std::vector<Command>& commands() {
  static const std::vector<Command> all = [] {
    auto with_common = [](nlohmann::json extra) {
      nlohmann::json j = common_defaults();
      j.update(extra);
      return j;
    };
    return std::vector<Command>{
        {"density", "root density of a factor on a tree, or projected density on a finite graph",
         with_common({{"factor", "lw:p=0.02,k=250"}, {"host", "tree:d=3"}}), cmd_density},
        {"scan-p", "intersection densities, stability moments and binomial sums across a p grid",
         with_common({{"factor", "lw:p=0.02,k=250"},
                      {"host", "tree:d=3"},
                      {"k", std::int64_t{2}},
                      {"grid", "0,0.25,0.5,0.75,1"},
                      {"stability", false},
                      {"inner_trials", std::uint64_t{400}}}),
         cmd_scan_p},
        {"stability", "jackknifed moments of the stability Q at one p",
         with_common({{"factor", "lw:p=0.02,k=250"},
                      {"host", "tree:d=3"},
                      {"p", 0.5},
                      {"moments", "0,1,2"},
                      {"inner_trials", std::uint64_t{400}}}),
         cmd_stability},
        {"bounds", "first-moment counts and rate bounds for a density profile or alpha vector",
         with_common({{"rho", ""},
                      {"alpha", ""},
                      {"n", std::int64_t{0}},
                      {"d", std::int64_t{0}},
                      {"lambda", 0.0},
                      {"self_test", false}}),
         cmd_bounds},
        {"oracle-check", "expected counts against enumeration of every configuration-model pairing",
         with_common({{"cases", "2:2,4:2,4:3,6:2"}}), cmd_oracle_check},
        {"pgw-transfer", "density of the transferred set on Poisson Galton-Watson trees",
         with_common({{"factor", "lw:p=0.002,k=3000"},
                      {"lambda", 20.0},
                      {"d", std::int64_t{0}},
                      {"u", 0.75}}),
         cmd_pgw_transfer},
    };
  }();
  return all;
}

inline const Command& find_command(const std::string& name) {
  for (const Command& c : commands())
    if (c.name == name) return c;
  throw InputError("unknown command: " + name);
}

/// Defaults overlaid with `given`; unknown keys and type changes are errors.
inline nlohmann::json normalize_params(const Command& cmd, const nlohmann::json& given) {
  nlohmann::json out = cmd.defaults;
  if (given.is_null()) return out;
  if (!given.is_object()) throw InputError("parameters must be a JSON object");
  for (const auto& [key, value] : given.items()) {
    if (!out.contains(key)) throw InputError(key + ": unknown parameter for " + cmd.name);
    const auto& def = out[key];
    const bool numeric = def.is_number() && value.is_number();
    if (!numeric && def.type() != value.type()) throw InputError(key + ": wrong type");
    if (def.is_number_unsigned()) {
      if (value.is_number_float() || (value.is_number_integer() && value.get<std::int64_t>() < 0))
        throw InputError(key + ": expected a non-negative integer");
      out[key] = value.get<std::uint64_t>();
    } else if (def.is_number_integer()) {
      if (value.is_number_float()) throw InputError(key + ": expected an integer");
      out[key] = value.get<std::int64_t>();
    } else if (def.is_number_float()) {
      out[key] = value.get<double>();
    } else {
      out[key] = value;
    }
  }
  return out;
}

struct RunOutcome {
  std::string output;
  nlohmann::json manifest;
};

inline RunOutcome run_command(const std::string& name, const nlohmann::json& given) {
  const Command& cmd = find_command(name);
  const nlohmann::json params = normalize_params(cmd, given);
  const auto format = params.at("format").get<std::string>();
  if (format != "csv" && format != "json") throw InputError("format: expected csv or json, got '" + format + "'");
  const auto start = std::chrono::steady_clock::now();
  const Table table = cmd.run(params);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunOutcome r;
  r.output = render(table, format);
  const std::string out = params.at("out").get<std::string>();
  r.manifest = {{"command", name},
                {"params", params},
                {"seed", params.at("seed")},
                {"seed_scheme", "per-trial streams derive(seed, stream, trial, ...) via splitmix64 mixing"},
                {"tool_version", kToolVersion},
                {"outputs", out.empty() ? nlohmann::json::array() : nlohmann::json::array({out})},
                {"wall_clock_seconds", seconds},
                {"trials", params.at("trials")},
                {"rows", table.rows.size()}};
  return r;
}

inline std::string manifest_path_for(const std::string& out) { return out + ".manifest.json"; }

/// Writes the output file and its manifest; with no output path the table
/// goes to `stdout_sink` and only an explicit manifest path is written.
inline void write_outcome(const RunOutcome& r, const std::string& manifest_path,
                          const std::function<void(const std::string&)>& stdout_sink) {
  const std::string out = r.manifest.at("params").at("out").get<std::string>();
  if (out.empty()) stdout_sink(r.output);
  else write_file(out, r.output);
  const std::string mpath = !manifest_path.empty() ? manifest_path : out.empty() ? "" : manifest_path_for(out);
  if (!mpath.empty()) write_file(mpath, r.manifest.dump(2) + "\n");
}

/// Re-runs the command recorded in a manifest, optionally redirecting the
/// output to `out_override`.
inline RunOutcome replay(const nlohmann::json& manifest, const std::optional<std::string>& out_override = {}) {
  if (!manifest.is_object() || !manifest.contains("command") || !manifest.contains("params"))
    throw InputError("manifest: needs command and params");
  const auto name = manifest.at("command").get<std::string>();
  nlohmann::json params = manifest.at("params");
  if (out_override) params["out"] = *out_override;
  return run_command(name, params);
}

}  // namespace fiid::cli
