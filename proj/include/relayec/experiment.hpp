// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and runners that produce the data tables for the
// relay-power figures and the solver timing benchmark.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "relayec/capacity.hpp"
#include "relayec/channel.hpp"
#include "relayec/link.hpp"
#include "relayec/solver.hpp"
#include "relayec/table.hpp"

namespace relayec {

/// Invalid configuration content (unknown key, malformed or out-of-range value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration file that cannot be read.
class ConfigIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Fig2, Fig3, Fig4, Fig5, Fig6, Fig7, Fig8, Bench };

inline constexpr std::string_view to_string(Command c) {
  switch (c) {
    case Command::Fig2: return "fig2";
    case Command::Fig3: return "fig3";
    case Command::Fig4: return "fig4";
    case Command::Fig5: return "fig5";
    case Command::Fig6: return "fig6";
    case Command::Fig7: return "fig7";
    case Command::Fig8: return "fig8";
    case Command::Bench: return "bench";
  }
  return "?";
}

inline Command parse_command(std::string_view s) {
  for (Command c : {Command::Fig2, Command::Fig3, Command::Fig4, Command::Fig5, Command::Fig6, Command::Fig7,
                    Command::Fig8, Command::Bench})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown subcommand '" + std::string(s) + "'");
}

inline std::string_view to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Exact: return "exact";
    case SolveMethod::Approximate: return "approx";
    case SolveMethod::EpsilonConstraint: return "epsilon";
  }
  return "?";
}

inline std::string_view to_string(Silenced s) {
  return s == Silenced::None ? "none" : (s == Silenced::A ? "A" : "B");
}

/// Ordered key=value overrides describing one curve of a figure.
using Overrides = std::vector<std::pair<std::string, std::string>>;

struct ExperimentConfig {
  Command command = Command::Fig2;
  SystemParams params;
  RelayMode mode = RelayMode::HD;
  std::size_t samples = 1000;
  std::uint64_t seed = 7;
  std::string axis;           ///< swept key; empty for fig8 and bench
  std::vector<double> grid;   ///< ascending; empty p_r grid means "auto"
  std::vector<Overrides> series;
  SolveMethod method = SolveMethod::Exact;
  std::string out;            ///< empty writes to stdout
  TableFormat format = TableFormat::Csv;
  unsigned threads = 0;       ///< 0 uses the hardware concurrency
  bool timing = false;        ///< add wall-time columns (makes output run-dependent)
  int repeats = 100;          ///< bench only

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Value parsing and printing

inline std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("'" + std::string(key) + "': expected a number, got '" + t + "'");
  return v;
}

inline std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size())
    throw ConfigError("'" + std::string(key) + "': expected a non-negative integer, got '" + t + "'");
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("'" + std::string(key) + "': expected true or false, got '" + t + "'");
}

inline RelayMode parse_mode(std::string_view text) {
  const std::string t = trim(text);
  if (t == "hd") return RelayMode::HD;
  if (t == "fd") return RelayMode::FD;
  throw ConfigError("mode: expected hd or fd, got '" + t + "'");
}

inline SolveMethod parse_method(std::string_view text) {
  const std::string t = trim(text);
  if (t == "exact") return SolveMethod::Exact;
  if (t == "approx") return SolveMethod::Approximate;
  throw ConfigError("method: expected exact or approx, got '" + t + "'");
}

inline TableFormat parse_format(std::string_view text) {
  const std::string t = trim(text);
  if (t == "csv") return TableFormat::Csv;
  if (t == "json") return TableFormat::Json;
  throw ConfigError("format: expected csv or json, got '" + t + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> g;
  if (trim(text).empty()) return g;
  for (const auto& item : split(text, ',')) g.push_back(parse_number("grid", item));
  return g;
}

inline std::string grid_text(const std::vector<double>& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + shortest(g[i]);
  return s;
}

/// "d_a=0.5,omega=0.01;d_a=0.2,omega=0.01" -> two override sets.
inline std::vector<Overrides> parse_series(std::string_view text) {
  std::vector<Overrides> out;
  if (trim(text).empty()) return out;
  for (const auto& group : split(text, ';')) {
    Overrides o;
    if (!group.empty()) {
      for (const auto& kv : split(group, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("series: expected key=value, got '" + kv + "'");
        o.emplace_back(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

inline std::string overrides_text(const Overrides& o) {
  std::string s;
  for (std::size_t i = 0; i < o.size(); ++i) s += (i ? "," : "") + o[i].first + "=" + o[i].second;
  return s;
}

inline std::string series_text(const std::vector<Overrides>& series) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) s += (i ? ";" : "") + overrides_text(series[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Scenario keys

/// Scenario keys accepted in config files, series overrides and sweep axes.
/// "eps", "theta" and "gamma_t" set both nodes.
inline bool set_param(SystemParams& p, std::string_view key, std::string_view value) {
  auto num = [&] { return parse_number(key, value); };
  if (key == "m") {
    const std::uint64_t m = parse_unsigned(key, value);
    if (m < 1 || m > 1000000) throw ConfigError("m: out of range");
    p.m = static_cast<int>(m);
  } else if (key == "p_tot") p.p_tot = num();
  else if (key == "omega") p.omega = num();
  else if (key == "eps") p.eps_a = p.eps_b = num();
  else if (key == "eps_a") p.eps_a = num();
  else if (key == "eps_b") p.eps_b = num();
  else if (key == "theta") p.theta_a = p.theta_b = num();
  else if (key == "theta_a") p.theta_a = num();
  else if (key == "theta_b") p.theta_b = num();
  else if (key == "gamma_t") p.gamma_t_a = p.gamma_t_b = num();
  else if (key == "gamma_t_a") p.gamma_t_a = num();
  else if (key == "gamma_t_b") p.gamma_t_b = num();
  else if (key == "w") p.w = num();
  else if (key == "d_a" || key == "alpha") {
    const double d_a = key == "d_a" ? num() : p.geom.d_a();
    const double alpha = key == "alpha" ? num() : p.geom.alpha();
    try {
      p.geom = Geometry(d_a, alpha);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "hd_rate_blocklength" || key == "hd-rate-blocklength") {
    const std::string t = trim(value);
    if (t == "half" || t == "m/2") p.hd_rate_blocklength = HdRateBlocklength::Half;
    else if (t == "full" || t == "m") p.hd_rate_blocklength = HdRateBlocklength::Full;
    else throw ConfigError("hd_rate_blocklength: expected half (m/2) or full (m)");
  } else {
    return false;
  }
  return true;
}

inline constexpr std::string_view kParamKeys[] = {"m",       "p_tot",     "omega",     "eps_a", "eps_b",
                                                  "theta_a", "theta_b",   "gamma_t_a", "gamma_t_b", "w",
                                                  "d_a",     "alpha",     "hd_rate_blocklength"};

inline std::string get_param(const SystemParams& p, std::string_view key) {
  if (key == "m") return std::to_string(p.m);
  if (key == "p_tot") return shortest(p.p_tot);
  if (key == "omega") return shortest(p.omega);
  if (key == "eps" || key == "eps_a") return shortest(p.eps_a);
  if (key == "eps_b") return shortest(p.eps_b);
  if (key == "theta" || key == "theta_a") return shortest(p.theta_a);
  if (key == "theta_b") return shortest(p.theta_b);
  if (key == "gamma_t" || key == "gamma_t_a") return shortest(p.gamma_t_a);
  if (key == "gamma_t_b") return shortest(p.gamma_t_b);
  if (key == "w") return shortest(p.w);
  if (key == "d_a") return shortest(p.geom.d_a());
  if (key == "alpha") return shortest(p.geom.alpha());
  if (key == "hd_rate_blocklength") return p.hd_rate_blocklength == HdRateBlocklength::Half ? "half" : "full";
  throw ConfigError("unknown parameter '" + std::string(key) + "'");
}

inline bool is_axis_key(std::string_view key) {
  for (std::string_view k : {"p_r", "eps", "theta", "w", "omega", "d_a", "p_tot", "gamma_t", "alpha"})
    if (k == key) return true;
  return false;
}

/// Applies one config-file or command-line setting.
inline void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  if (key == "mode") c.mode = parse_mode(value);
  else if (key == "samples") {
    c.samples = parse_unsigned(key, value);
    if (c.samples == 0) throw ConfigError("samples: must be >= 1");
  } else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "axis") c.axis = trim(value);
  else if (key == "grid") c.grid = parse_grid(value);
  else if (key == "series") c.series = parse_series(value);
  else if (key == "method") c.method = parse_method(value);
  else if (key == "out") c.out = trim(value);
  else if (key == "format") c.format = parse_format(value);
  else if (key == "threads") c.threads = static_cast<unsigned>(parse_unsigned(key, value));
  else if (key == "timing") c.timing = parse_bool(key, value);
  else if (key == "repeats") {
    const auto r = parse_unsigned(key, value);
    if (r < 1 || r > 1000000) throw ConfigError("repeats: out of range");
    c.repeats = static_cast<int>(r);
  } else if (!set_param(c.params, key, value)) {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

/// Keys that describe the scenario rather than where or how output is written.
inline bool is_scenario_key(std::string_view key) {
  return !(key == "out" || key == "format" || key == "threads" || key == "timing");
}

/// Parses "key = value" lines ('#' starts a comment) onto `c`. When
/// `scenario` is false, only output-related keys are taken.
inline void parse_config_text(ExperimentConfig& c, std::string_view text, bool scenario = true) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!scenario && is_scenario_key(key)) continue;
    try {
      apply_setting(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void load_config_file(ExperimentConfig& c, const std::string& path, bool scenario = true) {
  std::ifstream is(path);
  if (!is) throw ConfigIoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  parse_config_text(c, ss.str(), scenario);
}

/// Full config as text; parse_config_text on a default config restores it.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << '\n';
  os << "samples = " << c.samples << '\n';
  os << "seed = " << c.seed << '\n';
  os << "axis = " << c.axis << '\n';
  os << "grid = " << grid_text(c.grid) << '\n';
  os << "series = " << series_text(c.series) << '\n';
  os << "method = " << to_string(c.method) << '\n';
  os << "out = " << c.out << '\n';
  os << "format = " << (c.format == TableFormat::Csv ? "csv" : "json") << '\n';
  os << "threads = " << c.threads << '\n';
  os << "timing = " << (c.timing ? "true" : "false") << '\n';
  os << "repeats = " << c.repeats << '\n';
  for (std::string_view k : kParamKeys) os << k << " = " << get_param(c.params, k) << '\n';
  return os.str();
}

/// Fixes `key` for every curve: sets it on the base scenario and removes it
/// from the series overrides, merging curves that become identical.
inline void pin_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  apply_setting(c, key, value);
  std::vector<Overrides> merged;
  for (auto o : c.series) {
    std::erase_if(o, [&](const auto& kv) { return kv.first == key; });
    if (std::find(merged.begin(), merged.end(), o) == merged.end()) merged.push_back(std::move(o));
  }
  c.series = std::move(merged);
}

// ---------------------------------------------------------------------------
// Figure defaults

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return g;
}

/// Scenario and sweep each subcommand starts from before config and flags.
inline ExperimentConfig default_config(Command cmd) {
  ExperimentConfig c;
  c.command = cmd;
  switch (cmd) {
    case Command::Fig2:
      c.mode = RelayMode::HD;
      c.axis = "p_r";
      c.series = parse_series("d_a=0.1;d_a=0.5;d_a=0.8");
      break;
    case Command::Fig3:
      c.mode = RelayMode::FD;
      c.axis = "p_r";
      c.params.geom = Geometry(0.1, 4.0);
      c.series = parse_series("omega=0.1;omega=0.3;omega=0.5");
      break;
    case Command::Fig4:
      c.mode = RelayMode::HD;
      c.axis = "eps";
      c.grid = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
      c.series = parse_series("d_a=0.2;d_a=0.5");
      break;
    case Command::Fig5:
      c.mode = RelayMode::FD;
      c.axis = "eps";
      c.grid = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
      c.series = parse_series("omega=0.01;omega=0.05;omega=0.1");
      break;
    case Command::Fig6:
      c.axis = "theta";
      c.grid = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
      c.series = parse_series("mode=hd;mode=fd,omega=0.01;mode=fd,omega=0.05;mode=fd,omega=0.1");
      break;
    case Command::Fig7:
      c.axis = "w";
      c.grid = linspace(0.0, 1.0, 11);
      c.series = parse_series(
          "mode=hd,d_a=0.3;mode=hd,d_a=0.5;mode=hd,d_a=0.7;mode=fd,d_a=0.3;mode=fd,d_a=0.5;mode=fd,d_a=0.7");
      break;
    case Command::Fig8:
      c.mode = RelayMode::FD;
      c.axis = "w";
      c.grid = linspace(0.0, 1.0, 21);
      c.series = parse_series("d_a=0.5,omega=0.01;d_a=0.2,omega=0.01;d_a=0.2,omega=0.1");
      break;
    case Command::Bench:
      c.series = parse_series(
          "mode=hd,eps=1e-8;mode=hd,eps=1e-5;mode=hd,eps=1e-2;mode=fd,omega=0.01;mode=fd,omega=0.05;mode=fd,omega=0.1");
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Scenario resolution

struct Scenario {
  std::string label;
  RelayMode mode = RelayMode::HD;
  SystemParams params;
};

inline Scenario resolve_series(const ExperimentConfig& c, const Overrides& o) {
  Scenario s{overrides_text(o), c.mode, c.params};
  if (s.label.empty()) s.label = "base";
  for (const auto& [k, v] : o) {
    if (k == "mode") s.mode = parse_mode(v);
    else if (!set_param(s.params, k, v)) throw ConfigError("series: unknown key '" + k + "'");
  }
  return s;
}

inline std::vector<Scenario> scenarios(const ExperimentConfig& c) {
  std::vector<Scenario> out;
  if (c.series.empty()) out.push_back(resolve_series(c, {}));
  for (const auto& o : c.series) out.push_back(resolve_series(c, o));
  return out;
}

/// Grid used for the sweep; an empty p_r grid becomes 199 evenly spaced
/// relay powers strictly inside (0, p_tot).
inline std::vector<double> sweep_grid(const ExperimentConfig& c, const SystemParams& p) {
  if (c.axis == "p_r" && c.grid.empty()) return linspace(p.p_tot / 200.0, p.p_tot * 199.0 / 200.0, 199);
  return c.grid;
}

/// Throws ConfigError when the configuration cannot be run.
inline void validate(const ExperimentConfig& c) {
  const bool needs_axis = c.command != Command::Bench;
  if (needs_axis) {
    if (c.axis.empty()) throw ConfigError("axis: required for " + std::string(to_string(c.command)));
    if (!is_axis_key(c.axis)) throw ConfigError("axis: cannot sweep '" + c.axis + "'");
    const bool fixed = c.command == Command::Fig2 || c.command == Command::Fig3;
    if (fixed != (c.axis == "p_r"))
      throw ConfigError(fixed ? "axis: this subcommand sweeps p_r" : "axis: p_r is only swept by fig2 and fig3");
    if (c.command == Command::Fig8 && c.axis != "w") throw ConfigError("axis: fig8 sweeps w");
    if (c.grid.empty() && c.axis != "p_r") throw ConfigError("grid: must not be empty");
    if (!std::is_sorted(c.grid.begin(), c.grid.end()) ||
        std::adjacent_find(c.grid.begin(), c.grid.end()) != c.grid.end())
      throw ConfigError("grid: values must be strictly ascending");
  }
  for (const auto& s : scenarios(c)) {
    for (double x : needs_axis ? sweep_grid(c, s.params) : std::vector<double>{}) {
      SystemParams p = s.params;
      if (c.axis == "p_r") {
        if (!(x > 0.0 && x < p.p_tot)) throw ConfigError("grid: p_r values must lie in (0, p_tot)");
        continue;
      }
      set_param(p, c.axis, shortest(x));
      try {
        p.validate();
      } catch (const std::domain_error& e) {
        throw ConfigError(std::string("series '") + s.label + "': " + e.what());
      }
    }
    try {
      s.params.validate();
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("series '") + s.label + "': " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Worker pool

/// Runs fn(0..count-1) on up to `threads` workers; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, unsigned threads, F&& fn) {
  std::vector<T> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// ---------------------------------------------------------------------------
// Runners

inline std::vector<ChannelSample> scenario_samples(const ExperimentConfig& c, const SystemParams& p) {
  return sample_channels(p.geom, c.samples, c.seed);
}

inline SolveReport solve(RelayMode mode, std::span<const ChannelSample> s, const SystemParams& p, SolveMethod m,
                         const SolverOptions& opt = {}) {
  return m == SolveMethod::Approximate ? solve_approx(mode, s, p, opt) : solve_exact(mode, s, p, opt);
}

namespace detail {

inline std::vector<std::string> sweep_columns(bool timing) {
  std::vector<std::string> cols = {"series", "mode",    "method",  "d_a",   "omega",    "eps_a",
                                   "eps_b",  "theta_a", "theta_b", "w",     "p_tot",    "m",
                                   "p_r",    "p_node",  "r_ea",    "r_eb",  "weighted", "silenced",
                                   "degenerate", "objective_evals", "sample_evals"};
  if (timing) cols.push_back("wall_time_s");
  return cols;
}

inline std::vector<Cell> sweep_row(const Scenario& s, const SystemParams& p, std::string_view method,
                                   const EcPoint& ec, Silenced silenced, bool degenerate, std::size_t obj_evals,
                                   std::size_t sample_evals, bool timing, double wall) {
  std::vector<Cell> row = {s.label,
                           std::string(to_string(s.mode)),
                           std::string(method),
                           p.geom.d_a(),
                           p.omega,
                           p.eps_a,
                           p.eps_b,
                           p.theta_a,
                           p.theta_b,
                           p.w,
                           p.p_tot,
                           static_cast<std::int64_t>(p.m),
                           ec.alloc.p_r(),
                           ec.alloc.p_node(),
                           ec.r_ea,
                           ec.r_eb,
                           ec.weighted(p.w),
                           std::string(to_string(silenced)),
                           static_cast<std::int64_t>(degenerate),
                           static_cast<std::int64_t>(obj_evals),
                           static_cast<std::int64_t>(sample_evals)};
  if (timing) row.push_back(wall);
  return row;
}

inline std::vector<Cell> report_row(const Scenario& s, const SystemParams& p, const SolveReport& r, bool timing) {
  return sweep_row(s, p, to_string(r.method), r.ec, r.silenced, r.degenerate, r.objective_evals, r.sample_evals,
                   timing, r.wall_time);
}

}  // namespace detail

/// Sweep subcommands (fig2 to fig7): one task per (curve, grid point).
inline Table run_sweep(const ExperimentConfig& c) {
  const auto scen = scenarios(c);
  struct Task {
    std::size_t scenario;
    double x;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < scen.size(); ++i)
    for (double x : sweep_grid(c, scen[i].params)) tasks.push_back({i, x});

  using Rows = std::vector<std::vector<Cell>>;
  const auto results = parallel_map<Rows>(tasks.size(), c.threads, [&](std::size_t k) {
    const Scenario& s = scen[tasks[k].scenario];
    const double x = tasks[k].x;
    SystemParams p = s.params;
    Rows rows;
    if (c.axis == "p_r") {
      const auto samples = scenario_samples(c, p);
      const EcEstimator est(s.mode, samples, p);
      const EcPoint ec = est.ec_point(PowerAllocation(p.p_tot, x));
      rows.push_back(detail::sweep_row(s, p, "fixed", ec, Silenced::None, false, 0, 0, c.timing, 0.0));
      return rows;
    }
    set_param(p, c.axis, shortest(x));
    const auto samples = scenario_samples(c, p);
    if (c.command == Command::Fig4 || c.command == Command::Fig5) {
      rows.push_back(detail::report_row(s, p, solve_exact(s.mode, samples, p), c.timing));
      rows.push_back(detail::report_row(s, p, solve_approx(s.mode, samples, p), c.timing));
      const EcPoint eq = equal_allocation_point(s.mode, samples, p);
      rows.push_back(detail::sweep_row(s, p, "equal", eq, Silenced::None, false, 0, 0, c.timing, 0.0));
    } else {
      rows.push_back(detail::report_row(s, p, solve(s.mode, samples, p, c.method), c.timing));
    }
    return rows;
  });

  Table t;
  t.columns = detail::sweep_columns(c.timing);
  for (const auto& rows : results)
    for (const auto& r : rows) t.rows.push_back(r);
  return t;
}

struct ParetoPair {
  ParetoFrontier weighted;
  ParetoFrontier epsilon;
};

/// Floors for the epsilon-constraint sweep: every R_EB reached by the
/// weighted frontier plus `extra` evenly spaced values across its range.
inline std::vector<double> epsilon_floors(const ParetoFrontier& weighted, int extra = 21) {
  std::vector<double> mu;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : weighted.points) {
    mu.push_back(p.ec.r_eb);
    lo = std::min(lo, p.ec.r_eb);
    hi = std::max(hi, p.ec.r_eb);
  }
  if (!mu.empty() && hi > lo)
    for (double v : linspace(lo, hi, extra)) mu.push_back(v);
  std::sort(mu.begin(), mu.end());
  mu.erase(std::unique(mu.begin(), mu.end()), mu.end());
  return mu;
}

inline ParetoPair run_pareto_pair(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& p,
                                  const std::vector<double>& w_grid, SolveMethod weighted_method) {
  ParetoPair out;
  ParetoOptions opt;
  opt.method = weighted_method;
  out.weighted = pareto_weighted(mode, samples, p, w_grid, opt);
  out.epsilon = pareto_epsilon_constraint(mode, samples, p, epsilon_floors(out.weighted));
  return out;
}

/// fig8: weighted-sum and epsilon-constraint frontiers per curve.
inline Table run_pareto(const ExperimentConfig& c) {
  const auto scen = scenarios(c);
  const auto results = parallel_map<ParetoPair>(scen.size(), c.threads, [&](std::size_t i) {
    const auto samples = scenario_samples(c, scen[i].params);
    return run_pareto_pair(scen[i].mode, samples, scen[i].params, c.grid, c.method);
  });
  Table t;
  t.columns = {"series", "mode", "d_a", "omega", "method", "param", "feasible", "p_r", "r_ea", "r_eb"};
  for (std::size_t i = 0; i < scen.size(); ++i) {
    const Scenario& s = scen[i];
    auto head = [&](std::string_view method) {
      return std::vector<Cell>{s.label, std::string(to_string(s.mode)), s.params.geom.d_a(), s.params.omega,
                               std::string(method)};
    };
    const std::string wname = c.method == SolveMethod::Exact ? "weighted_exact" : "weighted_approx";
    for (const auto& pt : results[i].weighted.points) {
      auto row = head(wname);
      row.insert(row.end(), {pt.param, std::int64_t{1}, pt.ec.alloc.p_r(), pt.ec.r_ea, pt.ec.r_eb});
      t.rows.push_back(std::move(row));
    }
    // Feasible and infeasible floors in ascending order.
    std::vector<std::vector<Cell>> eps_rows;
    std::vector<double> keys;
    for (const auto& pt : results[i].epsilon.points) {
      auto row = head("epsilon");
      row.insert(row.end(), {pt.param, std::int64_t{1}, pt.ec.alloc.p_r(), pt.ec.r_ea, pt.ec.r_eb});
      eps_rows.push_back(std::move(row));
      keys.push_back(pt.param);
    }
    for (double mu : results[i].epsilon.infeasible) {
      auto row = head("epsilon");
      row.insert(row.end(), {mu, std::int64_t{0}, Blank{}, Blank{}, Blank{}});
      eps_rows.push_back(std::move(row));
      keys.push_back(mu);
    }
    std::vector<std::size_t> order(keys.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    for (std::size_t k : order) t.rows.push_back(eps_rows[k]);
  }
  return t;
}

struct BenchCell {
  Scenario scenario;
  int repeats = 0;
  SolveReport exact;   ///< last repeat
  SolveReport approx;  ///< last repeat
  double exact_mean_s = 0.0;
  double approx_mean_s = 0.0;

  double ratio() const { return approx_mean_s > 0.0 ? exact_mean_s / approx_mean_s : 0.0; }
};

/// Times both solvers `repeats` times on one channel set per curve. Runs
/// sequentially so that timings are not disturbed by other workers.
inline std::vector<BenchCell> run_bench_cells(const ExperimentConfig& c) {
  std::vector<BenchCell> cells;
  for (const auto& s : scenarios(c)) {
    const auto samples = scenario_samples(c, s.params);
    BenchCell cell{s, c.repeats, {}, {}, 0.0, 0.0};
    for (int r = 0; r < c.repeats; ++r) {
      // Alternate the order so cache warm-up does not favor one solver.
      if (r % 2 == 0) {
        cell.exact = solve_exact(s.mode, samples, s.params);
        cell.approx = solve_approx(s.mode, samples, s.params);
      } else {
        cell.approx = solve_approx(s.mode, samples, s.params);
        cell.exact = solve_exact(s.mode, samples, s.params);
      }
      cell.exact_mean_s += cell.exact.wall_time;
      cell.approx_mean_s += cell.approx.wall_time;
    }
    cell.exact_mean_s /= c.repeats;
    cell.approx_mean_s /= c.repeats;
    cells.push_back(std::move(cell));
  }
  return cells;
}

inline Table bench_table(const std::vector<BenchCell>& cells, bool timing) {
  Table t;
  t.columns = {"series",         "mode",           "repeats",
               "exact_p_r",      "approx_p_r",     "exact_weighted",
               "approx_weighted", "exact_objective_evals", "approx_objective_evals",
               "exact_sample_evals", "approx_sample_evals"};
  if (timing) t.columns.insert(t.columns.end(), {"exact_ms", "approx_ms", "ratio"});
  for (const auto& b : cells) {
    const double w = b.scenario.params.w;
    std::vector<Cell> row = {b.scenario.label,
                             std::string(to_string(b.scenario.mode)),
                             static_cast<std::int64_t>(b.repeats),
                             b.exact.alloc.p_r(),
                             b.approx.alloc.p_r(),
                             b.exact.ec.weighted(w),
                             b.approx.ec.weighted(w),
                             static_cast<std::int64_t>(b.exact.objective_evals),
                             static_cast<std::int64_t>(b.approx.objective_evals),
                             static_cast<std::int64_t>(b.exact.sample_evals),
                             static_cast<std::int64_t>(b.approx.sample_evals)};
    if (timing) row.insert(row.end(), {1e3 * b.exact_mean_s, 1e3 * b.approx_mean_s, b.ratio()});
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Runs a validated configuration and returns its table.
inline Table run_experiment(const ExperimentConfig& c) {
  validate(c);
  switch (c.command) {
    case Command::Fig8: return run_pareto(c);
    case Command::Bench: return bench_table(run_bench_cells(c), c.timing);
    default: return run_sweep(c);
  }
}

}  // namespace relayec
