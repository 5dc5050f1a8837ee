#pragma once

// Empirical operator norms, decay fits for the block operators, the
// dimension-weighted maximal inequality, and tail experiments for the random
// multipliers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/lambda_sets.hpp"
#include "carleson/operators.hpp"
#include "carleson/rng.hpp"
#include "carleson/selector_process.hpp"
#include "carleson/signal.hpp"
#include "carleson/sparse_weights.hpp"
#include "carleson/spectra.hpp"

namespace carleson {

using SignalOperator = std::function<Signal(Signal const&)>;

struct NormEstimate {
  double p = 2.0;
  double lower_bound = 0.0;
  std::optional<double> symbol_upper;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
};

/// max over random test signals on [lo, hi) of ||op f||_p / ||f||_p. Trial t
/// draws from its own stream, so a longer run extends a shorter one.
inline NormEstimate opnorm_estimate(SignalOperator const& op, double p, Index lo, Index hi, int trials,
                                    std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("opnorm_estimate: trials must be >= 1");
  if (!(p >= 1.0)) throw std::invalid_argument("opnorm_estimate: p must be >= 1");
  NormEstimate est;
  est.p = p;
  est.trials = trials;
  est.seed = seed;
  for (int t = 0; t < trials; ++t) {
    Signal const f = random_test_signal(seed, static_cast<std::uint64_t>(t), lo, hi);
    double const den = f.norm(p);
    double const ratio = den > 0 ? op(f).norm(p) / den : 0.0;
    est.ratios.push_back(ratio);
    est.lower_bound = std::max(est.lower_bound, ratio);
  }
  return est;
}

/// Certified sup over the torus of the multiplier of convolution with `kernel`,
/// which is the exact l^2 operator norm.
inline double certified_symbol_norm(Signal const& kernel, std::size_t grid) {
  return padded_supnorm(dft(kernel, FrequencyGrid(grid)));
}

enum class BlockFamily { P, Q };

struct BlockDecayOptions {
  int grid_exponent = 16;
  int trials = 0;  // Monte Carlo trials per k; 0 skips the lower bounds
  std::uint64_t seed = 0;
  Index window = 256;  // test signals on [-window, window)
};

struct BlockDecayRow {
  int k = 0;
  double symbol_bound = 0;      // sup over Lambda of the certified symbol norm (single lambda)
  double derivative_bound = 0;  // same for d/dlambda of the symbol
  double union_bound = 0;       // sqrt(|Lambda|) * symbol_bound >= maximal operator norm
  double mc_single = 0;         // Monte Carlo lower bound, lambda = Lambda[0]
  double mc_maximal = 0;        // Monte Carlo lower bound, maximal operator
};

struct BlockDecayFit {
  std::vector<BlockDecayRow> rows;
  double symbol_slope = std::numeric_limits<double>::quiet_NaN();
  double derivative_slope = std::numeric_limits<double>::quiet_NaN();
  double mc_maximal_slope = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // some norm vanished, log-fit undefined
};

inline ModulatedKernel block_kernel(SelectorPath const& path, int k, BlockFamily family) {
  return family == BlockFamily::P ? p_k_kernel(path, k) : q_k_kernel(path, k);
}

inline BlockDecayRow block_decay_row(SelectorPath const& path, LambdaSet const& lambdas, int k, BlockFamily family,
                                     BlockDecayOptions const& opts) {
  if (lambdas.empty()) throw std::invalid_argument("block_decay: empty lambda set");
  ModulatedKernel const kern = block_kernel(path, k, family);
  std::size_t const grid = std::size_t{1} << opts.grid_exponent;
  BlockDecayRow row;
  row.k = k;
  // The P_k symbol at lambda is a translate of the one at 0, but Q_k's is not.
  std::size_t const probes = kern.translation_modulated() ? 1 : lambdas.size();
  for (std::size_t i = 0; i < probes; ++i) {
    row.symbol_bound = std::max(row.symbol_bound, certified_symbol_norm(kern.kernel_at(lambdas[i]), grid));
    row.derivative_bound =
        std::max(row.derivative_bound, certified_symbol_norm(kern.lambda_derivative_at(lambdas[i]), grid));
  }
  row.union_bound = std::sqrt(static_cast<double>(lambdas.size())) * row.symbol_bound;
  if (opts.trials > 0) {
    double const lam0 = lambdas[0];
    auto single = [&](Signal const& f) { return apply(kern, lam0, f); };
    auto maxop = [&](Signal const& f) { return maximal(kern, lambdas, f).values; };
    row.mc_single = opnorm_estimate(single, 2.0, -opts.window, opts.window, opts.trials, opts.seed).lower_bound;
    row.mc_maximal = opnorm_estimate(maxop, 2.0, -opts.window, opts.window, opts.trials, opts.seed).lower_bound;
  }
  return row;
}

namespace detail {

inline double log2_slope(std::vector<double> const& ks, std::vector<double> const& values) {
  std::vector<double> y;
  for (double v : values) y.push_back(std::log2(v));
  return least_squares(ks, y).slope;
}

}  // namespace detail

/// Least-squares slopes of log2(norm) against k for one path.
inline BlockDecayFit block_decay_fit(SelectorPath const& path, LambdaSet const& lambdas, int k_lo, int k_hi,
                                     BlockFamily family, BlockDecayOptions const& opts = {}) {
  if (k_hi - k_lo + 1 < 3) throw std::invalid_argument("block_decay_fit: need at least 3 k values");
  BlockDecayFit fit;
  std::vector<double> ks, sym, der, mc;
  for (int k = k_lo; k <= k_hi; ++k) {
    fit.rows.push_back(block_decay_row(path, lambdas, k, family, opts));
    auto const& r = fit.rows.back();
    ks.push_back(k);
    sym.push_back(r.symbol_bound);
    der.push_back(r.derivative_bound);
    mc.push_back(r.mc_maximal);
    if (!(r.symbol_bound > 0) || !(r.derivative_bound > 0)) fit.degenerate = true;
  }
  if (fit.degenerate) return fit;
  fit.symbol_slope = detail::log2_slope(ks, sym);
  fit.derivative_slope = detail::log2_slope(ks, der);
  if (opts.trials > 0 && std::all_of(mc.begin(), mc.end(), [](double v) { return v > 0; })) {
    fit.mc_maximal_slope = detail::log2_slope(ks, mc);
  }
  return fit;
}

struct BatchDecayFit {
  std::vector<int> ks;
  std::vector<double> mean_log2_symbol;
  std::vector<double> mean_log2_derivative;
  double symbol_slope = std::numeric_limits<double>::quiet_NaN();
  double derivative_slope = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

/// Slopes of the per-k mean over paths of log2 of the certified symbol bounds.
inline BatchDecayFit block_decay_fit_batch(std::vector<SelectorPath> const& paths, LambdaSet const& lambdas, int k_lo,
                                           int k_hi, BlockFamily family, BlockDecayOptions opts = {}) {
  if (paths.empty()) throw std::invalid_argument("block_decay_fit_batch: no paths");
  if (k_hi - k_lo + 1 < 3) throw std::invalid_argument("block_decay_fit_batch: need at least 3 k values");
  opts.trials = 0;
  BatchDecayFit out;
  std::vector<double> ks;
  for (int k = k_lo; k <= k_hi; ++k) {
    double s = 0, d = 0;
    for (auto const& p : paths) {
      auto const row = block_decay_row(p, lambdas, k, family, opts);
      if (!(row.symbol_bound > 0) || !(row.derivative_bound > 0)) out.degenerate = true;
      s += std::log2(row.symbol_bound);
      d += std::log2(row.derivative_bound);
    }
    out.ks.push_back(k);
    ks.push_back(k);
    out.mean_log2_symbol.push_back(s / static_cast<double>(paths.size()));
    out.mean_log2_derivative.push_back(d / static_cast<double>(paths.size()));
  }
  if (out.degenerate) return out;
  out.symbol_slope = least_squares(ks, out.mean_log2_symbol).slope;
  out.derivative_slope = least_squares(ks, out.mean_log2_derivative).slope;
  return out;
}

// ---------------------------------------------------------------------------
// Maximal inequality over a set of finite Minkowski dimension

struct SobolevReport {
  double a = 0;          // sup_lambda ||T_lambda||, certified
  double A = 0;          // sup_lambda ||d/dlambda T_lambda||, certified
  double dimension = 0;  // d
  double c_d = 0;        // max over probed scales of N(delta) delta^d
  double bound_factor = 0;  // C_d^(1/2) (a + a^(1-d/2) A^(d/2))
  double slack = 10.0;
  std::vector<double> ratios;  // ||sup_Lambda |T_lambda f| ||_2 / (bound_factor ||f||_2)
  double max_ratio = 0;
  bool holds = true;
};

/// Checks ||sup_Lambda |T_lambda f|||_2 <= slack C_d^(1/2) (a + a^(1-d/2) A^(d/2)) ||f||_2.
/// The family must be translation-modulated, T_lambda f = sum_d K(d) e(lambda d) f(x - d);
/// then ||T_lambda|| does not depend on lambda and a, A are certified symbol norms.
inline SobolevReport sobolev_check(ModulatedKernel const& family, LambdaSet const& lambdas, double dimension,
                                   std::vector<double> const& scales, std::vector<Signal> const& batch,
                                   int grid_exponent = 16, double slack = 10.0) {
  if (!family.translation_modulated()) {
    throw std::invalid_argument("sobolev_check: family must be translation-modulated");
  }
  if (lambdas.empty()) throw std::invalid_argument("sobolev_check: empty lambda set");
  if (!(dimension >= 0.0 && dimension <= 1.0)) throw std::invalid_argument("sobolev_check: dimension must lie in [0, 1]");
  SobolevReport rep;
  rep.slack = slack;
  rep.dimension = dimension;
  std::size_t const grid = std::size_t{1} << grid_exponent;
  rep.a = certified_symbol_norm(family.kernel_at(0.0), grid);
  rep.A = certified_symbol_norm(family.lambda_derivative_at(0.0), grid);
  std::vector<Index> counts;
  for (double d : scales) counts.push_back(covering_number(lambdas, d));
  rep.c_d = sup_count_times_scale(scales, counts, dimension);
  rep.bound_factor =
      std::sqrt(rep.c_d) * (rep.a + std::pow(rep.a, 1.0 - dimension / 2) * std::pow(rep.A, dimension / 2));
  for (auto const& f : batch) {
    double const den = rep.bound_factor * f.norm(2.0);
    double const lhs = maximal(family, lambdas, f).values.norm(2.0);
    double const ratio = den > 0 ? lhs / den : (lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.holds = rep.max_ratio <= slack;
  return rep;
}

/// Odd smooth kernel K(d) = (d/s) exp(-(d/s)^2 / 2) / s on |d| <= 6s.
inline ModulatedKernel smooth_modulated_family(double width, double amplitude = 1.0) {
  if (!(width > 0)) throw std::invalid_argument("smooth_modulated_family: width must be positive");
  auto const reach = static_cast<Index>(std::ceil(6 * width));
  std::vector<Tap> taps;
  for (Index d = -reach; d <= reach; ++d) {
    double const t = static_cast<double>(d) / width;
    double const w = amplitude * t * std::exp(-t * t / 2) / width;
    if (w != 0.0) taps.push_back({d, d, w});
  }
  return ModulatedKernel(std::move(taps));
}

// ---------------------------------------------------------------------------
// Square function and tails of the random multiplier

/// [sum_{2^k <= m <= 2^(k+1)} sigma_m / W_m^2]^(1/2) for the standard sigma.
inline double square_function(double alpha, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("square_function: alpha must lie in (0,1)");
  if (k < 0 || k > 40) throw std::invalid_argument("square_function: k out of range");
  Index const lo = Index{1} << k;
  Index const hi = Index{1} << (k + 1);
  CompensatedSum w, s;
  for (Index m = 1; m <= hi; ++m) {
    double const sig = selector_probability(alpha, m);
    w.add(sig);
    if (m >= lo) s.add(sig / (w.value() * w.value()));
  }
  return std::sqrt(s.value());
}

struct SquareFunctionReport {
  std::vector<int> ks;
  std::vector<double> values;
  double constant = 0;  // smallest C with value <= C 2^(-k(1-alpha)/2) for every k
};

inline SquareFunctionReport square_function_constant(double alpha, int k_lo, int k_hi) {
  SquareFunctionReport rep;
  for (int k = k_lo; k <= k_hi; ++k) {
    double const v = square_function(alpha, k);
    rep.ks.push_back(k);
    rep.values.push_back(v);
    rep.constant = std::max(rep.constant, v * std::exp2(k * (1.0 - alpha) / 2));
  }
  return rep;
}

/// M(lambda, theta) = sum_{2^k <= m <= 2^(k+1)} Y_m e(lambda m + theta (S_{m-1} + 1)) / W_m.
inline Complex block_multiplier(SelectorPath const& path, int k, double lambda, double theta) {
  Index const lo = Index{1} << k;
  Index const hi = Index{1} << (k + 1);
  if (hi > path.length()) throw std::invalid_argument("block_multiplier: block exceeds path length");
  Complex acc{};
  for (Index m = lo; m <= hi; ++m) {
    double const y = path.y(m);
    if (y == 0.0) continue;
    acc += y / path.w(m) * unit_exp(lambda * static_cast<double>(m) + theta * static_cast<double>(path.s(m - 1) + 1));
  }
  return acc;
}

struct TailExperiment {
  int k = 0;
  std::size_t samples = 0;
  double lambda = 0;
  double theta = 0;
  double scale = 0;  // thresholds are t * scale
  std::vector<double> threshold_grid;
  std::vector<double> exceedance;
  std::vector<double> moduli;  // |M| per path
  double fitted_c = std::numeric_limits<double>::quiet_NaN();  // exceedance ~ exp(-c t^2)
};

/// Empirical P(|M(lambda, theta)| > t scale) across the ensemble. The scale
/// defaults to the square function of the block.
inline TailExperiment subgaussian_tail(std::vector<SelectorPath> const& paths, int k, double lambda, double theta,
                                       std::vector<double> const& t_grid, std::optional<double> scale = std::nullopt) {
  if (paths.empty()) throw std::invalid_argument("subgaussian_tail: empty ensemble");
  TailExperiment ex;
  ex.k = k;
  ex.samples = paths.size();
  ex.lambda = lambda;
  ex.theta = theta;
  if (scale) {
    ex.scale = *scale;
  } else {
    CompensatedSum s;
    auto const& p = paths.front();
    for (Index m = Index{1} << k; m <= (Index{1} << (k + 1)); ++m) s.add(p.sigma(m) / (p.w(m) * p.w(m)));
    ex.scale = std::sqrt(s.value());
  }
  ex.threshold_grid = t_grid;
  std::sort(ex.threshold_grid.begin(), ex.threshold_grid.end());
  for (auto const& p : paths) ex.moduli.push_back(std::abs(block_multiplier(p, k, lambda, theta)));
  std::vector<double> tx, ty;
  for (double t : ex.threshold_grid) {
    auto const over = std::count_if(ex.moduli.begin(), ex.moduli.end(), [&](double v) { return v > t * ex.scale; });
    double const frac = static_cast<double>(over) / static_cast<double>(ex.samples);
    ex.exceedance.push_back(frac);
    if (frac > 0) {
      tx.push_back(t * t);
      ty.push_back(std::log(frac));
    }
  }
  if (tx.size() >= 2) {
    double const slope = least_squares(tx, ty).slope;
    if (std::isfinite(slope)) ex.fitted_c = -slope;
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Coefficient bounds of the decomposition terms

/// max over m <= m_max of m^2 |sigma_m / W_m - (1 - alpha)/m|.
inline double main_term_coefficient_constant(double alpha, Index m_max) {
  CompensatedSum w;
  double c = 0;
  for (Index m = 1; m <= m_max; ++m) {
    double const sig = selector_probability(alpha, m);
    w.add(sig);
    auto const md = static_cast<double>(m);
    c = std::max(c, md * md * std::abs(sig / w.value() - main_term_constant(alpha) / md));
  }
  return c;
}

/// Fitted beta in |1/S_m - 1/W_m| <~ m^-beta: slope of log max over dyadic
/// blocks [2^j, 2^(j+1)) of the selected-m differences, from m >= 2^j_lo.
inline double selector_sum_decay_exponent(SelectorPath const& path, int j_lo) {
  std::vector<double> x, y;
  for (int j = j_lo; (Index{1} << (j + 1)) <= path.length(); ++j) {
    double best = 0;
    for (Index m = Index{1} << j; m < (Index{1} << (j + 1)); ++m) {
      if (path.x(m) == 0) continue;
      best = std::max(best, std::abs(1.0 / static_cast<double>(path.s(m)) - 1.0 / path.w(m)));
    }
    if (best > 0) {
      x.push_back(j * std::log(2.0));
      y.push_back(std::log(best));
    }
  }
  if (x.size() < 3) throw std::invalid_argument("selector_sum_decay_exponent: path too short");
  return -least_squares(x, y).slope;
}

}  // namespace carleson
