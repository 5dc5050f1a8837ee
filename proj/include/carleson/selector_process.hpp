#pragma once

// Random selector sequences X_m ~ Bernoulli(m^-alpha), their partial sums
// S_m, expected sums W_m, centred variables Y_m = X_m - sigma_m, the hitting
// times a_j and the deterministic skeleton p_j = floor(C_alpha j^(1/(1-alpha))).
//
// Index conventions: every sequence is stored 1-based with slot 0 holding the
// empty-sum value. For negative indices S and W are extended oddly
// (S_{-m} = -S_m, W_{-m} = -W_m) while X, Y and sigma are extended evenly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/rng.hpp"

namespace carleson {

class SelectorParams {
 public:
  SelectorParams(double alpha, Index length, std::uint64_t seed)
      : alpha_(alpha), length_(length), seed_(seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("alpha must lie in (0,1), got " + format_double(alpha));
    }
    if (length < 1) throw std::invalid_argument("length must be >= 1");
  }

  double alpha() const { return alpha_; }
  Index length() const { return length_; }
  std::uint64_t seed() const { return seed_; }

  SelectorParams with_seed(std::uint64_t seed) const { return {alpha_, length_, seed}; }

  friend bool operator==(SelectorParams const&, SelectorParams const&) = default;

 private:
  double alpha_;
  Index length_;
  std::uint64_t seed_;
};

/// sigma_m = m^-alpha.
inline double selector_probability(double alpha, Index m) {
  return std::pow(static_cast<double>(m), -alpha);
}

class SelectorPath {
 public:
  /// Builds a path from explicit selector values and probabilities, both given
  /// for m = 1..N (element i corresponds to m = i + 1). Used by sample_path and
  /// by tests that need degenerate paths.
  static SelectorPath from_selectors(SelectorParams params, std::vector<std::uint8_t> const& x,
                                     std::vector<double> const& sigma, bool standard_sigma = false) {
    if (static_cast<Index>(x.size()) != params.length() || sigma.size() != x.size()) {
      throw std::invalid_argument("from_selectors: sequence length does not match params.length()");
    }
    SelectorPath path(params);
    path.standard_sigma_ = standard_sigma;
    auto const n = static_cast<std::size_t>(params.length());
    path.x_.assign(n + 1, 0);
    path.s_.assign(n + 1, 0);
    path.w_.assign(n + 1, 0.0);
    path.y_.assign(n + 1, 0.0);
    path.sigma_.assign(n + 1, 0.0);
    CompensatedSum w;
    for (std::size_t m = 1; m <= n; ++m) {
      std::uint8_t const xm = x[m - 1];
      if (xm > 1) throw std::invalid_argument("from_selectors: selector values must be 0 or 1");
      double const sm = sigma[m - 1];
      if (!(sm >= 0.0 && sm <= 1.0)) throw std::invalid_argument("from_selectors: sigma outside [0,1]");
      path.x_[m] = xm;
      path.sigma_[m] = sm;
      path.s_[m] = path.s_[m - 1] + xm;
      w.add(sm);
      path.w_[m] = w.value();
      path.y_[m] = static_cast<double>(xm) - sm;
    }
    return path;
  }

  SelectorParams const& params() const { return params_; }
  Index length() const { return params_.length(); }
  double alpha() const { return params_.alpha(); }
  bool standard_sigma() const { return standard_sigma_; }

  int x(Index m) const { return x_[slot(m)]; }
  double sigma(Index m) const { return sigma_[slot(m)]; }
  double y(Index m) const { return y_[slot(m)]; }
  Index s(Index m) const { return m >= 0 ? s_[slot_or_zero(m)] : -s_[slot_or_zero(-m)]; }
  double w(Index m) const { return m >= 0 ? w_[slot_or_zero(m)] : -w_[slot_or_zero(-m)]; }

  /// Raw 0..N storage (slot 0 is the empty sum).
  std::vector<std::uint8_t> const& x_values() const { return x_; }
  std::vector<Index> const& s_values() const { return s_; }
  std::vector<double> const& w_values() const { return w_; }

 private:
  explicit SelectorPath(SelectorParams params) : params_(params) {}

  std::size_t slot(Index m) const {
    Index const a = m < 0 ? -m : m;
    if (a == 0 || a > params_.length()) {
      throw std::out_of_range("selector index " + std::to_string(m) + " outside 1..N");
    }
    return static_cast<std::size_t>(a);
  }
  std::size_t slot_or_zero(Index m) const {
    if (m > params_.length()) {
      throw std::out_of_range("selector index " + std::to_string(m) + " beyond path length");
    }
    return static_cast<std::size_t>(m);
  }

  SelectorParams params_;
  bool standard_sigma_ = false;
  std::vector<std::uint8_t> x_;
  std::vector<Index> s_;
  std::vector<double> w_;
  std::vector<double> y_;
  std::vector<double> sigma_;
};

/// Samples X_m for m = 1..N. Draw m is the uniform at counter m of the stream
/// keyed by the seed, so each selector depends only on (seed, m).
inline SelectorPath sample_path(SelectorParams const& params) {
  auto const n = static_cast<std::size_t>(params.length());
  CounterRng const rng(params.seed());
  std::vector<std::uint8_t> x(n);
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto const m = static_cast<Index>(i + 1);
    sigma[i] = selector_probability(params.alpha(), m);
    x[i] = rng.uniform_at(static_cast<std::uint64_t>(m)) < sigma[i] ? 1 : 0;
  }
  return SelectorPath::from_selectors(params, x, sigma, /*standard_sigma=*/true);
}

struct HittingTimes {
  /// a[j] = min{ m >= 1 : S_m = j } for 1 <= j <= S_N; a[0] holds a0_convention.
  std::vector<Index> a;
  Index a0_convention = 0;

  Index max_j() const { return static_cast<Index>(a.size()) - 1; }
};

/// a_0 is 0 when a_1 = 1 (always the case for sigma_1 = 1) so that the
/// regrouping by S_{m-1} + 1 is exact; it falls back to 1 otherwise.
inline HittingTimes hitting_times(SelectorPath const& path) {
  HittingTimes out;
  out.a.push_back(0);
  auto const& s = path.s_values();
  for (Index m = 1; m <= path.length(); ++m) {
    if (s[static_cast<std::size_t>(m)] > s[static_cast<std::size_t>(m - 1)]) out.a.push_back(m);
  }
  out.a0_convention = (out.a.size() > 1 && out.a[1] == 1) ? 0 : 1;
  out.a[0] = out.a0_convention;
  return out;
}

struct DeterministicSkeleton {
  double alpha = 0;
  double exponent = 0;  // 1 / (1 - alpha)
  double c_alpha = 0;   // (1 - alpha)^(1 / (1 - alpha))
  std::vector<Index> p;  // p[0] = 0, p[j] for j = 1..j_max
  std::vector<Index> r;  // r[j] = p[j] - p[j-1]; r[0] = 0
  Index j0 = 1;          // r_j >= 1 for every j0 <= j <= j_max
  bool exact_integer = false;

  Index j_max() const { return static_cast<Index>(p.size()) - 1; }
};

namespace detail {

inline Index checked_power_floor_div(Index j, int d) {
  // floor(j^d / d^d) in 128-bit arithmetic.
  __int128 num = 1;
  __int128 den = 1;
  constexpr __int128 cap = static_cast<__int128>(1) << 120;
  for (int i = 0; i < d; ++i) {
    num *= j;
    den *= d;
    if (num > cap || den > cap) throw std::overflow_error("skeleton: p_j exceeds the integer range");
  }
  __int128 const q = num / den;
  if (q > static_cast<__int128>(std::numeric_limits<Index>::max())) {
    throw std::overflow_error("skeleton: p_j exceeds the integer range");
  }
  return static_cast<Index>(q);
}

}  // namespace detail

/// p_j = floor(C_alpha j^(1/(1-alpha))). When 1/(1-alpha) is an integer d the
/// formula is floor(j^d / d^d), evaluated exactly; otherwise it is evaluated in
/// long double. Overflow of the 64-bit range throws std::overflow_error.
inline DeterministicSkeleton skeleton(double alpha, Index j_max) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("skeleton: alpha must lie in (0,1)");
  if (j_max < 1) throw std::invalid_argument("skeleton: j_max must be >= 1");
  DeterministicSkeleton sk;
  sk.alpha = alpha;
  sk.exponent = 1.0 / (1.0 - alpha);
  sk.c_alpha = std::pow(1.0 - alpha, sk.exponent);
  double const d_round = std::round(sk.exponent);
  sk.exact_integer = std::abs(sk.exponent - d_round) < 1e-9 && d_round <= 60;
  auto const n = static_cast<std::size_t>(j_max);
  sk.p.assign(n + 1, 0);
  sk.r.assign(n + 1, 0);
  long double const log_c = std::log(static_cast<long double>(1.0 - alpha)) * sk.exponent;
  for (std::size_t j = 1; j <= n; ++j) {
    if (sk.exact_integer) {
      sk.p[j] = detail::checked_power_floor_div(static_cast<Index>(j), static_cast<int>(d_round));
    } else {
      long double const v = std::exp(log_c + sk.exponent * std::log(static_cast<long double>(j)));
      if (!(v < 9.2e18L)) throw std::overflow_error("skeleton: p_j exceeds the integer range");
      sk.p[j] = static_cast<Index>(std::floor(v));
    }
    sk.r[j] = sk.p[j] - sk.p[j - 1];
  }
  sk.j0 = j_max + 1;
  for (Index j = j_max; j >= 1 && sk.r[static_cast<std::size_t>(j)] >= 1; --j) sk.j0 = j;
  return sk;
}

struct ConcentrationReport {
  double epsilon = 0;
  double exponent = 0;              // epsilon + (1 - alpha) / 2
  std::vector<double> statistics;   // one per path, input order
  std::vector<std::uint64_t> seeds;

  double fraction_exceeding(double threshold) const {
    if (statistics.empty()) return 0.0;
    auto const n = std::count_if(statistics.begin(), statistics.end(),
                                 [threshold](double v) { return v > threshold; });
    return static_cast<double>(n) / static_cast<double>(statistics.size());
  }

  /// Empirical quantile (nearest rank) of the per-path statistic.
  double quantile(double q) const {
    if (statistics.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> sorted = statistics;
    std::sort(sorted.begin(), sorted.end());
    auto const rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
  }
};

/// max_m |S_m - W_m| m^-(epsilon + (1-alpha)/2) for one path.
inline double concentration_statistic(SelectorPath const& path, double epsilon) {
  double const expo = epsilon + 0.5 * (1.0 - path.alpha());
  auto const& s = path.s_values();
  auto const& w = path.w_values();
  double best = 0.0;
  for (Index m = 1; m <= path.length(); ++m) {
    auto const i = static_cast<std::size_t>(m);
    double const dev = std::abs(static_cast<double>(s[i]) - w[i]);
    best = std::max(best, dev * std::pow(static_cast<double>(m), -expo));
  }
  return best;
}

inline ConcentrationReport concentration_report(std::vector<SelectorPath> const& paths, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("concentration_report: epsilon must be > 0");
  ConcentrationReport rep;
  rep.epsilon = epsilon;
  if (paths.empty()) return rep;
  rep.exponent = epsilon + 0.5 * (1.0 - paths.front().alpha());
  for (auto const& p : paths) {
    if (p.alpha() != paths.front().alpha() || p.length() != paths.front().length()) {
      throw std::invalid_argument("concentration_report: paths must share alpha and length");
    }
    rep.statistics.push_back(concentration_statistic(p, epsilon));
    rep.seeds.push_back(p.params().seed());
  }
  return rep;
}

/// Text table export: '#'-prefixed parameter lines, then "m,x,s,w" rows.
inline void write_path_table(std::ostream& os, SelectorPath const& path) {
  if (!path.standard_sigma()) {
    throw std::invalid_argument("write_path_table: only paths with sigma_m = m^-alpha are exportable");
  }
  os << "# alpha=" << format_double(path.alpha()) << '\n';
  os << "# length=" << path.length() << '\n';
  os << "# seed=" << path.params().seed() << '\n';
  os << "m,x,s,w\n";
  for (Index m = 1; m <= path.length(); ++m) {
    os << m << ',' << path.x(m) << ',' << path.s(m) << ',' << format_double(path.w(m)) << '\n';
  }
}

/// Reads a table written by write_path_table (or an independent implementation
/// following the same layout). S and W columns are cross-checked against the
/// values recomputed from the X column.
inline SelectorPath read_path_table(std::istream& is) {
  double alpha = -1;
  Index length = -1;
  std::uint64_t seed = 0;
  std::string line;
  std::vector<std::uint8_t> x;
  std::vector<Index> s_col;
  std::vector<double> w_col;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto const eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      std::string const val = line.substr(eq + 1);
      if (key == "alpha") alpha = parse_double(val);
      else if (key == "length") length = parse_index(val);
      else if (key == "seed") seed = std::stoull(val);
      continue;
    }
    if (!header_seen) {
      if (line != "m,x,s,w") throw std::invalid_argument("read_path_table: expected header 'm,x,s,w'");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell[4];
    for (auto& c : cell) {
      if (!std::getline(ss, c, ',')) throw std::invalid_argument("read_path_table: short row '" + line + "'");
    }
    Index const m = parse_index(cell[0]);
    if (m != static_cast<Index>(x.size()) + 1) throw std::invalid_argument("read_path_table: rows out of order");
    Index const xm = parse_index(cell[1]);
    if (xm != 0 && xm != 1) throw std::invalid_argument("read_path_table: x must be 0 or 1");
    x.push_back(static_cast<std::uint8_t>(xm));
    s_col.push_back(parse_index(cell[2]));
    w_col.push_back(parse_double(cell[3]));
  }
  if (alpha < 0 || length < 0) throw std::invalid_argument("read_path_table: missing alpha/length header");
  if (static_cast<Index>(x.size()) != length) throw std::invalid_argument("read_path_table: row count != length");
  SelectorParams const params(alpha, length, seed);
  std::vector<double> sigma(x.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] = selector_probability(alpha, static_cast<Index>(i + 1));
  auto path = SelectorPath::from_selectors(params, x, sigma, true);
  for (Index m = 1; m <= length; ++m) {
    auto const i = static_cast<std::size_t>(m - 1);
    if (s_col[i] != path.s(m)) throw std::invalid_argument("read_path_table: S column inconsistent at m=" + std::to_string(m));
    if (std::abs(w_col[i] - path.w(m)) > 1e-9 * std::max(1.0, path.w(m))) {
      throw std::invalid_argument("read_path_table: W column inconsistent at m=" + std::to_string(m));
    }
  }
  return path;
}

}  // namespace carleson
