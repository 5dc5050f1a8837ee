#pragma once

// Experiment driver: flat key=value configs, a fixed registry of named
// experiments, and deterministic comma-delimited result files.
//
// Config grammar, one entry per line:
//
//     # comment
//     key = value
//
// Blank lines and lines starting with '#' are ignored; whitespace around key
// and value is trimmed; a key may appear once. Keys not listed in
// `known_config_keys` are rejected.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/estimators.hpp"
#include "carleson/lambda_sets.hpp"
#include "carleson/operators.hpp"
#include "carleson/rng.hpp"
#include "carleson/selector_process.hpp"
#include "carleson/signal.hpp"
#include "carleson/sparse_weights.hpp"

#ifndef CARLESON_VERSION
#define CARLESON_VERSION "0.1.0"
#endif

namespace carleson::harness {

inline constexpr std::string_view version = CARLESON_VERSION;

/// Invalid configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::string const& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  std::string const& field() const { return field_; }

 private:
  std::string field_;
};

using RawConfig = std::map<std::string, std::string>;

inline std::vector<std::string> const& known_config_keys() {
  static std::vector<std::string> const keys{
      "experiment", "alpha",   "seed",  "window_exponent", "m_max_exponent", "lambda_spec",
      "grid_exponent", "trials", "r",   "output_path",     "paths",          "length",
      "k_min",      "k_max",   "epsilon", "gamma",         "j_max",          "epsilon_exponents",
      "lambda_points", "k"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto const e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline void check_key(std::string const& key) {
  auto const& keys = known_config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, "unknown config key");
}

}  // namespace detail

inline RawConfig parse_config_text(std::string_view text) {
  RawConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string const t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto const eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    std::string const key = detail::trim(std::string_view(t).substr(0, eq));
    std::string const value = detail::trim(std::string_view(t).substr(eq + 1));
    detail::check_key(key);
    if (!cfg.emplace(key, value).second) throw ConfigError(key, "key given twice");
  }
  return cfg;
}

inline RawConfig read_config_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// "key=value" replaces or adds one entry.
inline void apply_override(RawConfig& cfg, std::string_view kv) {
  auto const eq = kv.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override", "expected key=value, got '" + std::string(kv) + "'");
  std::string const key = detail::trim(kv.substr(0, eq));
  detail::check_key(key);
  cfg[key] = detail::trim(kv.substr(eq + 1));
}

// ---------------------------------------------------------------------------
// Lambda set constructors: name:key=value,key=value

struct LambdaSpec {
  LambdaSet set;
  double nominal_dimension = 0.0;  // dimension of the limiting set the construction approximates
};

inline LambdaSpec parse_lambda_spec(std::string const& text) {
  auto const colon = text.find(':');
  std::string const name = detail::trim(text.substr(0, colon));
  std::string const body = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto bad = [&](std::string const& why) { return ConfigError("lambda_spec", why + " in '" + text + "'"); };
  try {
    if (name == "list") {
      std::vector<double> pts;
      std::istringstream ps(body);
      std::string tok;
      while (ps >> tok) pts.push_back(parse_double(tok));
      if (pts.empty()) throw bad("empty point list");
      return {LambdaSet(std::move(pts)), 0.0};
    }
    std::map<std::string, double> kv;
    std::istringstream ps(body);
    std::string part;
    while (std::getline(ps, part, ',')) {
      if (detail::trim(part).empty()) continue;
      auto const eq = part.find('=');
      if (eq == std::string::npos) throw bad("expected key=value");
      kv[detail::trim(part.substr(0, eq))] = parse_double(detail::trim(part.substr(eq + 1)));
    }
    auto get = [&](std::string const& k, double def) {
      auto it = kv.find(k);
      double v = it == kv.end() ? def : it->second;
      if (it != kv.end()) kv.erase(it);
      return v;
    };
    LambdaSpec out;
    if (name == "lacunary") {
      int const count = static_cast<int>(get("count", 8));
      double const ratio = get("ratio", 0.5);
      double const offset = get("offset", 0.0);
      out = {make_lacunary(count, ratio, offset), 0.0};
    } else if (name == "cantor") {
      int const level = static_cast<int>(get("level", 8));
      double const ratio = get("ratio", 1.0 / 3.0);
      double const lo = get("lo", 0.05);
      double const hi = get("hi", 0.45);
      out = {make_cantor(level, ratio, lo, hi), std::log(2.0) / std::log(1.0 / ratio)};
    } else if (name == "grid") {
      int const count = static_cast<int>(get("count", 16));
      double const gap = get("gap", 0.05);
      out = {make_arithmetic_grid(count, gap), 1.0};
    } else {
      throw bad("unknown constructor '" + name + "'");
    }
    if (!kv.empty()) throw bad("unknown parameter '" + kv.begin()->first + "'");
    return out;
  } catch (ConfigError const&) {
    throw;
  } catch (std::exception const& e) {
    throw bad(e.what());
  }
}

// ---------------------------------------------------------------------------
// Typed config

struct ExperimentConfig {
  std::string experiment;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  int window_exponent = 8;
  int m_max_exponent = 10;
  std::string lambda_spec = "lacunary:count=8,ratio=0.5";
  int grid_exponent = 16;
  int trials = 10;
  double r = 1.0;
  std::string output_path;
  int paths = 10;
  Index length = 0;
  int k_min = 5;
  int k_max = 11;
  double epsilon = 0.1;
  double gamma = 0.3;
  Index j_max = 200;
  std::vector<int> epsilon_exponents{2, 4, 6};
  int lambda_points = 256;
  int k = 10;

  LambdaSpec lambdas;
  RawConfig echo;  // every key after defaults and overrides
};

struct ExperimentResult;
using ExperimentRunner = std::function<ExperimentResult(ExperimentConfig const&)>;

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::string anchor;
  RawConfig defaults;
  ExperimentRunner runner;
};

inline std::vector<ExperimentInfo> const& registry();

inline ExperimentInfo const& find_experiment(std::string const& name) {
  for (auto const& e : registry()) {
    if (e.name == name) return e;
  }
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

namespace detail {

inline double get_real(RawConfig const& c, std::string const& key) {
  try {
    return parse_double(c.at(key));
  } catch (std::exception const&) {
    throw ConfigError(key, "expected a real number, got '" + c.at(key) + "'");
  }
}

inline Index get_integer(RawConfig const& c, std::string const& key) {
  try {
    return parse_index(c.at(key));
  } catch (std::exception const&) {
    throw ConfigError(key, "expected an integer, got '" + c.at(key) + "'");
  }
}

inline int get_exponent(RawConfig const& c, std::string const& key) {
  Index const v = get_integer(c, key);
  if (v < 0 || v > 20) throw ConfigError(key, "exponent must lie in 0..20, got " + std::to_string(v));
  return static_cast<int>(v);
}

inline int get_positive(RawConfig const& c, std::string const& key, Index cap) {
  Index const v = get_integer(c, key);
  if (v < 1 || v > cap) throw ConfigError(key, "must lie in 1.." + std::to_string(cap) + ", got " + std::to_string(v));
  return static_cast<int>(v);
}

}  // namespace detail

/// Merges the experiment defaults under `raw`, then checks and converts every
/// field. The echo omits output_path so results do not depend on where they go.
inline ExperimentConfig validate_config(RawConfig raw) {
  if (!raw.count("experiment") || raw.at("experiment").empty()) throw ConfigError("experiment", "missing");
  ExperimentInfo const& info = find_experiment(raw.at("experiment"));
  for (auto const& [k, v] : info.defaults) raw.emplace(k, v);
  for (auto const& [k, v] : raw) detail::check_key(k);
  (void)raw.emplace("output_path", info.name + ".csv");

  ExperimentConfig c;
  c.experiment = info.name;
  c.alpha = detail::get_real(raw, "alpha");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1), got " + raw.at("alpha"));
  Index const seed = detail::get_integer(raw, "seed");
  if (seed < 0) throw ConfigError("seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.window_exponent = detail::get_exponent(raw, "window_exponent");
  c.m_max_exponent = detail::get_exponent(raw, "m_max_exponent");
  c.grid_exponent = detail::get_exponent(raw, "grid_exponent");
  c.trials = detail::get_positive(raw, "trials", 100000);
  c.r = detail::get_real(raw, "r");
  if (!(c.r >= 1.0 && c.r < 2.0)) throw ConfigError("r", "must lie in [1, 2), got " + raw.at("r"));
  c.output_path = raw.at("output_path");
  if (c.output_path.empty()) throw ConfigError("output_path", "empty");
  c.paths = detail::get_positive(raw, "paths", 100000);
  c.length = detail::get_integer(raw, "length");
  if (c.length < 0 || c.length > (Index{1} << 20)) throw ConfigError("length", "must lie in 0..2^20 (0 selects 2^m_max_exponent)");
  if (c.length == 0) c.length = Index{1} << c.m_max_exponent;
  c.k_min = detail::get_exponent(raw, "k_min");
  c.k_max = detail::get_exponent(raw, "k_max");
  if (c.k_max < c.k_min + 2) throw ConfigError("k_max", "need k_max >= k_min + 2");
  if (c.k_max + 1 > 20) throw ConfigError("k_max", "block 2^(k_max+1) exceeds 2^20");
  c.epsilon = detail::get_real(raw, "epsilon");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
  c.gamma = detail::get_real(raw, "gamma");
  if (!(c.gamma > -1.0 && c.gamma < 1.0)) throw ConfigError("gamma", "must lie in (-1, 1)");
  c.j_max = detail::get_positive(raw, "j_max", 100000);
  c.lambda_points = detail::get_positive(raw, "lambda_points", 1 << 16);
  c.k = detail::get_exponent(raw, "k");
  if (c.k + 1 > 20) throw ConfigError("k", "block 2^(k+1) exceeds 2^20");
  {
    c.epsilon_exponents.clear();
    std::istringstream es(raw.at("epsilon_exponents"));
    std::string tok;
    while (std::getline(es, tok, ' ')) {
      if (detail::trim(tok).empty()) continue;
      Index v = 0;
      try {
        v = parse_index(detail::trim(tok));
      } catch (std::exception const&) {
        throw ConfigError("epsilon_exponents", "expected integers, got '" + tok + "'");
      }
      if (v < 2 || v > 20) throw ConfigError("epsilon_exponents", "each exponent must lie in 2..20");
      c.epsilon_exponents.push_back(static_cast<int>(v));
    }
    if (c.epsilon_exponents.size() < 2) throw ConfigError("epsilon_exponents", "need at least two exponents");
  }
  c.lambda_spec = raw.at("lambda_spec");
  c.lambdas = parse_lambda_spec(c.lambda_spec);
  raw.erase("output_path");
  c.echo = raw;
  return c;
}

// ---------------------------------------------------------------------------
// Results

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... Cells>
  void add(Cells const&... cells) {
    std::vector<std::string> row;
    (row.push_back(cell_text(cells)), ...);
    if (row.size() != columns.size()) throw std::logic_error("Table::add: column count mismatch");
    rows.push_back(std::move(row));
  }

 private:
  static std::string cell_text(std::string const& s) { return s; }
  static std::string cell_text(char const* s) { return s; }
  static std::string cell_text(double v) { return format_double(v); }
  static std::string cell_text(int v) { return std::to_string(v); }
  static std::string cell_text(Index v) { return std::to_string(v); }
  static std::string cell_text(std::size_t v) { return std::to_string(v); }
};

struct ExperimentResult {
  Table table;
  std::vector<std::pair<std::string, std::string>> metrics;
  std::string criterion;  // the threshold the summary line is judged against
  bool passed = false;

  void metric(std::string const& name, double v) { metrics.emplace_back(name, format_double(v)); }
  void metric(std::string const& name, std::string v) { metrics.emplace_back(name, std::move(v)); }
};

inline std::string render_result(ExperimentConfig const& cfg, ExperimentInfo const& info, ExperimentResult const& res) {
  std::ostringstream os;
  os << "# experiment=" << info.name << '\n';
  os << "# description=" << info.description << '\n';
  os << "# anchor=" << info.anchor << '\n';
  os << "# version=" << version << '\n';
  os << "# seed=" << cfg.seed << '\n';
  for (auto const& [k, v] : cfg.echo) os << "# config." << k << '=' << v << '\n';
  for (auto const& [k, v] : res.metrics) os << "# metric." << k << '=' << v << '\n';
  os << "# criterion=" << res.criterion << '\n';
  for (std::size_t i = 0; i < res.table.columns.size(); ++i) os << (i ? "," : "") << res.table.columns[i];
  os << '\n';
  for (auto const& row : res.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  os << "# summary " << (res.passed ? "PASS" : "FAIL") << ' ' << info.name;
  for (auto const& [k, v] : res.metrics) os << ' ' << k << '=' << v;
  os << '\n';
  return os.str();
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void write_atomic(std::string const& path, std::string const& content) {
  std::string const tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output_path", "cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("output_path", "write failed for '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("output_path", "cannot move result into '" + path + "'");
  }
}

struct RunOutcome {
  bool passed = false;
  std::string output_path;
  std::string summary;
  double seconds = 0;
};

/// Runs the experiment, writes the result file and a ".meta" sidecar holding
/// the wall-clock time. The result file itself depends only on the config.
inline RunOutcome run(ExperimentConfig const& cfg) {
  ExperimentInfo const& info = find_experiment(cfg.experiment);
  auto const start = std::chrono::steady_clock::now();
  ExperimentResult const res = info.runner(cfg);
  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string const text = render_result(cfg, info, res);
  write_atomic(cfg.output_path, text);
  std::ostringstream meta;
  meta << "# run metadata for " << cfg.output_path << '\n';
  meta << "version=" << version << '\n';
  meta << "wall_clock_seconds=" << format_double(secs) << '\n';
  write_atomic(cfg.output_path + ".meta", meta.str());
  RunOutcome out;
  out.passed = res.passed;
  out.output_path = cfg.output_path;
  out.seconds = secs;
  auto const last = text.rfind("# summary ");
  out.summary = text.substr(last + 2, text.size() - last - 3);
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

/// Seed of the i-th member of an ensemble drawn under the master seed.
inline std::uint64_t member_seed(std::uint64_t seed, std::uint64_t i) {
  return CounterRng(seed, 0x656e73656d626c65ULL).word_at(i);
}

inline std::vector<SelectorPath> ensemble(double alpha, Index length, std::uint64_t seed, int count) {
  std::vector<SelectorPath> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sample_path(SelectorParams(alpha, length, member_seed(seed, static_cast<std::uint64_t>(i)))));
  }
  return out;
}

inline ExperimentResult run_carleson_delta(ExperimentConfig const& c) {
  if (c.m_max_exponent < c.window_exponent) throw ConfigError("m_max_exponent", "truncation must cover the window");
  if (c.lambdas.set.size() > 16) throw ConfigError("lambda_spec", "at most 16 points");
  ModulatedKernelSpec spec{KernelKind::carleson, c.alpha, nullptr, std::nullopt, Index{1} << c.m_max_exponent};
  auto const res = eval_maximal(spec, c.lambdas.set, Signal::delta(0));
  ExperimentResult out;
  out.table.columns = {"n", "value", "expected", "abs_error"};
  double err = 0;
  Index const w = Index{1} << c.window_exponent;
  for (Index n = -w; n <= w; ++n) {
    double const expected = n == 0 ? 0.0 : 1.0 / std::abs(static_cast<double>(n));
    double const v = res.values(n).real();
    double const e = std::abs(v - expected);
    err = std::max(err, e);
    out.table.add(n, v, expected, e);
  }
  out.metric("max_abs_error", err);
  out.metric("lambda_count", static_cast<double>(c.lambdas.set.size()));
  out.criterion = "max_abs_error < 1e-12";
  out.passed = err < 1e-12;
  return out;
}

inline ExperimentResult run_block_decay(ExperimentConfig const& c, BlockFamily family) {
  Index const length = Index{1} << (c.k_max + 1);
  auto const paths = ensemble(c.alpha, length, c.seed, c.paths);
  BlockDecayOptions opts;
  opts.grid_exponent = c.grid_exponent;
  auto const batch = block_decay_fit_batch(paths, c.lambdas.set, c.k_min, c.k_max, family, opts);
  opts.trials = c.trials;
  opts.seed = c.seed;
  opts.window = Index{1} << c.window_exponent;
  ExperimentResult out;
  out.table.columns = {"k",          "mean_log2_symbol", "mean_log2_derivative", "symbol_bound",
                       "union_bound", "mc_single",        "mc_maximal"};
  bool dominated = true;
  for (std::size_t i = 0; i < batch.ks.size(); ++i) {
    auto const row = block_decay_row(paths.front(), c.lambdas.set, batch.ks[i], family, opts);
    dominated = dominated && row.mc_single <= row.symbol_bound * (1 + 1e-9) &&
                row.mc_maximal <= row.union_bound * (1 + 1e-9);
    out.table.add(batch.ks[i], batch.mean_log2_symbol[i], batch.mean_log2_derivative[i], row.symbol_bound,
                  row.union_bound, row.mc_single, row.mc_maximal);
  }
  double const sym_target = -(1.0 - c.alpha) / 2 + 0.15;
  double const der_target = (1.0 + c.alpha) / 2 - 0.2;
  out.metric("symbol_slope", batch.symbol_slope);
  out.metric("derivative_slope", batch.derivative_slope);
  out.metric("symbol_slope_max", sym_target);
  out.metric("derivative_slope_min", der_target);
  out.metric("upper_bounds_dominate", dominated ? "yes" : "no");
  out.criterion = "symbol_slope <= symbol_slope_max and derivative_slope >= derivative_slope_min";
  out.passed = !batch.degenerate && batch.symbol_slope <= sym_target && batch.derivative_slope >= der_target && dominated;
  return out;
}

inline ExperimentResult run_concentration(ExperimentConfig const& c) {
  auto const paths = ensemble(c.alpha, c.length, c.seed, c.paths);
  auto const rep = concentration_report(paths, c.epsilon);
  ExperimentResult out;
  out.table.columns = {"path", "seed", "statistic"};
  for (std::size_t i = 0; i < paths.size(); ++i) out.table.add(i, std::to_string(rep.seeds[i]), rep.statistics[i]);
  double const frac = rep.fraction_exceeding(10.0);
  out.metric("exponent", rep.exponent);
  out.metric("fraction_above_10", frac);
  out.metric("median", rep.quantile(0.5));
  out.criterion = "fraction_above_10 <= 0.05";
  out.passed = frac <= 0.05;
  return out;
}

inline ExperimentResult run_aj_approx(ExperimentConfig const& c) {
  auto const sk = skeleton(c.alpha, c.j_max);
  ExperimentResult out;
  out.table.columns = {"lambda", "j", "abs_error", "scaled_error"};
  double constant = 0;
  for (double lam : c.lambdas.set.points()) {
    auto const rep = aj_skeleton_approximation(sk, lam, 2, c.j_max);
    constant = std::max(constant, rep.constant);
    for (auto const& row : rep.rows) out.table.add(lam, row.j, row.error, row.scaled_error);
  }
  double residual = 0;
  auto const paths = ensemble(c.alpha, Index{1} << c.m_max_exponent, c.seed, c.paths);
  Index const w = Index{1} << c.window_exponent;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Signal const f = gaussian_signal(c.seed, i, -w, w);
    for (double lam : c.lambdas.set.points()) {
      residual = std::max(residual, aj_identity_check(paths[i], lam, f, paths[i].length()).residual);
    }
  }
  out.metric("constant", constant);
  out.metric("identity_residual", residual);
  out.criterion = "constant < 100 and identity_residual <= 1e-10";
  out.passed = constant < 100 && residual <= 1e-10;
  return out;
}

inline ExperimentResult run_sparse_cert(ExperimentConfig const& c) {
  Index const support = Index{1} << c.window_exponent;
  ModulatedKernel const carleson_kernel =
      build_kernel({KernelKind::carleson, c.alpha, nullptr, std::nullopt, Index{1} << c.m_max_exponent});
  LambdaSet const& lambdas = c.lambdas.set;
  std::vector<std::pair<std::string, SignalOperator>> ops{
      {"hardy_littlewood", [](Signal const& f) { return hardy_littlewood_max(f); }},
      {"carleson", [&](Signal const& f) { return maximal(carleson_kernel, lambdas, f).values; }}};
  ExperimentResult out;
  out.table.columns = {"operator", "seed", "pair", "pairing", "form", "constant", "intervals", "valid"};
  bool ok = true;
  for (auto const& [name, op] : ops) {
    double kmin = std::numeric_limits<double>::infinity(), kmax = 0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      std::uint64_t const seed = c.seed + s;
      double k_seed = 0;
      for (int i = 0; i < c.trials; ++i) {
        auto const f = gaussian_signal(seed, 2 * static_cast<std::uint64_t>(i), 0, support);
        // Both operators are positive and Pi sees only |g|, so g >= 0 is the worst sign pattern.
        auto const g = gaussian_signal(seed, 2 * static_cast<std::uint64_t>(i) + 1, 0, support).modulus();
        auto const cert = sparse_certificate(op, f, g, c.r);
        bool const valid = verify_sparse(cert.collection).valid && !cert.partial &&
                           cert.pairing <= cert.constant * cert.form * (1 + 1e-12);
        ok = ok && valid && std::isfinite(cert.constant);
        k_seed = std::max(k_seed, cert.constant);
        out.table.add(name, std::to_string(seed), i, cert.pairing, cert.form, cert.constant,
                      cert.collection.entries.size(), valid ? "yes" : "no");
      }
      kmin = std::min(kmin, k_seed);
      kmax = std::max(kmax, k_seed);
    }
    double const spread = kmin > 0 ? kmax / kmin : std::numeric_limits<double>::infinity();
    out.metric(name + "_constant_max", kmax);
    out.metric(name + "_seed_spread", spread);
    ok = ok && spread <= 2.0;
  }
  out.criterion = "all certificates valid and per-seed constant within a factor 2 across 3 seeds";
  out.passed = ok;
  return out;
}

inline ExperimentResult run_weights(ExperimentConfig const& c) {
  Index const w = Index{1} << c.window_exponent;
  Weight const weight = Weight::power(-w, w + 1, c.gamma);
  ModulatedKernel const kern =
      build_kernel({KernelKind::carleson, c.alpha, nullptr, std::nullopt, Index{1} << c.m_max_exponent});
  auto op = [&](Signal const& f) { return maximal(kern, c.lambdas.set, f).values; };
  double const p = 2.0;
  auto const a = weighted_bound_check(op, weight, p, c.r, c.trials, c.seed);
  auto const b = weighted_bound_check(op, weight, p, c.r, c.trials, c.seed + 1);
  ExperimentResult out;
  out.table.columns = {"batch", "trial", "ratio"};
  for (std::size_t i = 0; i < a.ratios.size(); ++i) out.table.add("a", i, a.ratios[i]);
  for (std::size_t i = 0; i < b.ratios.size(); ++i) out.table.add("b", i, b.ratios[i]);
  double const spread = std::max(a.ratio, b.ratio) / std::min(a.ratio, b.ratio);
  out.metric("ap_characteristic", a.ap.value);
  out.metric("rh_characteristic", a.rh.value);
  out.metric("ratio_a", a.ratio);
  out.metric("ratio_b", b.ratio);
  out.metric("ratio_spread", spread);
  out.criterion = "characteristics finite (exactly 1 when gamma = 0) and ratio_spread <= 1.5";
  bool ok = std::isfinite(a.ap.value) && std::isfinite(a.rh.value) && spread <= 1.5;
  if (c.gamma == 0.0) ok = ok && a.ap.value == 1.0 && a.rh.value == 1.0;
  out.passed = ok;
  return out;
}

inline ExperimentResult run_sobolev(ExperimentConfig const& c) {
  ModulatedKernel const family = smooth_modulated_family(8.0);
  Index const w = Index{1} << c.window_exponent;
  std::vector<Signal> batch;
  for (int i = 0; i < c.trials; ++i) batch.push_back(random_test_signal(c.seed, static_cast<std::uint64_t>(i), -w, w));
  auto const rep = sobolev_check(family, c.lambdas.set, c.lambdas.nominal_dimension, dyadic_scales(1, 12), batch,
                                 c.grid_exponent);
  ExperimentResult out;
  out.table.columns = {"trial", "ratio"};
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) out.table.add(i, rep.ratios[i]);
  out.metric("a", rep.a);
  out.metric("A", rep.A);
  out.metric("dimension", rep.dimension);
  out.metric("c_d", rep.c_d);
  out.metric("max_ratio", rep.max_ratio);
  out.criterion = "max_ratio <= 10";
  out.passed = rep.holds;
  return out;
}

inline ExperimentResult run_tails(ExperimentConfig const& c) {
  int const k = c.k;
  auto const paths = ensemble(c.alpha, Index{1} << (k + 1), c.seed, c.paths);
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.5 * i);
  double const lam = c.lambdas.set[0];
  auto const ex = subgaussian_tail(paths, k, lam, 0.25, grid);
  auto const sq = square_function_constant(c.alpha, c.k_min, c.k_max);
  ExperimentResult out;
  out.table.columns = {"t", "exceedance"};
  double at3 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.table.add(grid[i], ex.exceedance[i]);
    if (grid[i] == 3.0) at3 = ex.exceedance[i];
  }
  out.metric("square_function", ex.scale);
  out.metric("square_function_constant", sq.constant);
  out.metric("fitted_c", ex.fitted_c);
  out.metric("exceedance_at_3", at3);
  out.criterion = "exceedance_at_3 < 0.05";
  out.passed = at3 < 0.05;
  return out;
}

inline ExperimentResult run_lemma43(ExperimentConfig const& c) {
  std::vector<int> ex = c.epsilon_exponents;
  std::sort(ex.begin(), ex.end());
  double const power = c.alpha / (1.0 - c.alpha);
  double const j_need = std::ceil(std::exp2(ex.back() * power)) + 1;
  if (j_need > 2e6) throw ConfigError("epsilon_exponents", "skeleton range too large for this alpha");
  auto const sk = skeleton(c.alpha, static_cast<Index>(j_need));
  Index const w = Index{1} << c.window_exponent;
  ExperimentResult out;
  out.table.columns = {"epsilon", "trial", "constant"};
  std::vector<double> ks(ex.size(), 0.0);
  for (std::size_t e = 0; e < ex.size(); ++e) {
    double const eps = std::exp2(-ex[e]);
    for (int t = 0; t < c.trials; ++t) {
      Signal const f = gaussian_signal(c.seed, static_cast<std::uint64_t>(t), 0, w);
      double const k = lemma43_bound_check(sk, eps, f, static_cast<std::size_t>(c.lambda_points)).constant;
      ks[e] = std::max(ks[e], k);
      out.table.add(eps, t, k);
    }
    out.metric("constant_eps_2^-" + std::to_string(ex[e]), ks[e]);
  }
  double const growth = ks.back() / ks.front();
  out.metric("growth", growth);
  out.criterion = "growth <= 4 * 1.2";
  out.passed = growth <= 4.8;
  return out;
}

}  // namespace detail

inline std::vector<ExperimentInfo> const& registry() {
  static std::vector<ExperimentInfo> const reg = [] {
    auto base = [](RawConfig extra) {
      RawConfig d{{"alpha", "0.5"},          {"seed", "0"},
                  {"window_exponent", "8"},  {"m_max_exponent", "10"},
                  {"lambda_spec", "lacunary:count=8,ratio=0.5"},
                  {"grid_exponent", "16"},   {"trials", "10"},
                  {"r", "1"},                {"paths", "10"},
                  {"length", "0"},           {"k_min", "5"},
                  {"k_max", "11"},           {"epsilon", "0.1"},
                  {"gamma", "0.3"},          {"j_max", "200"},
                  {"epsilon_exponents", "2 4 6"}, {"lambda_points", "256"},
                  {"k", "10"}};
      for (auto& [k, v] : extra) d[k] = v;
      return d;
    };
    using namespace detail;
    return std::vector<ExperimentInfo>{
        {"carleson-delta", "maximal Carleson operator on a point mass against 1/|n|",
         "Carleson kernel: closed form on a point mass",
         base({{"window_exponent", "10"}, {"lambda_spec", "lacunary:count=16,ratio=0.5"}}), run_carleson_delta},
        {"pk-decay", "certified symbol norms of the P_k blocks and their slope in k",
         "P_k blocks: random multiplier decay", base({}),
         [](ExperimentConfig const& c) { return run_block_decay(c, BlockFamily::P); }},
        {"qk-decay", "certified symbol norms of the Q_k blocks and their slope in k",
         "Q_k blocks: martingale multiplier decay", base({{"alpha", "0.6666666666666666"}}),
         [](ExperimentConfig const& c) { return run_block_decay(c, BlockFamily::Q); }},
        {"concentration", "max_m |S_m - W_m| m^-((1-alpha)/2 + eps) across independent paths",
         "selector sums: concentration about the mean",
         base({{"alpha", "0.3"}, {"paths", "200"}, {"length", "100000"}}), run_concentration},
        {"aj-approx", "skeleton A_j against the Dirichlet-kernel approximation and the regrouping identity",
         "A_j coefficients: Dirichlet approximation",
         base({{"alpha", "0.6666666666666666"}, {"lambda_spec", "list:0.1 0.3 0.45"}, {"paths", "20"}}),
         run_aj_approx},
        {"sparse-cert", "stopping-time sparse certificates for the maximal function and Carleson operator",
         "sparse domination of the maximal operators",
         base({{"window_exponent", "7"}, {"trials", "20"}, {"r", "1.5"}}), run_sparse_cert},
        {"weights", "Muckenhoupt characteristics of (1+|n|)^gamma and the weighted Carleson ratio",
         "weighted l^2 bound via sparse forms", base({{"window_exponent", "12"}, {"m_max_exponent", "12"}, {"trials", "50"}}),
         run_weights},
        {"sobolev", "maximal inequality over a set of finite Minkowski dimension with slack 10",
         "dimension-weighted Sobolev maximal inequality",
         base({{"lambda_spec", "cantor:level=8,ratio=0.3333333333333333,lo=0.05,hi=0.45"}, {"trials", "50"}}),
         run_sobolev},
        {"tails", "exceedance of the block multiplier over multiples of its square function",
         "Q_k multiplier: sub-Gaussian tails",
         base({{"alpha", "0.6666666666666666"}, {"paths", "500"}, {"k_min", "4"}, {"k_max", "14"},
               {"lambda_spec", "list:0.3"}}),
         run_tails},
        {"lemma43", "arithmetic skeleton sum against log(1/eps) times the maximal function",
         "skeleton phases away from the origin", base({{"alpha", "0.6666666666666666"}, {"window_exponent", "7"}, {"trials", "5"}}),
         run_lemma43},
    };
  }();
  return reg;
}

}  // namespace carleson::harness
