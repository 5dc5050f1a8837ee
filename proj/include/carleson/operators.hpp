#pragma once

// Modulated convolution operators on finite signals.
//
// Every operator here has the form
//
//     T_lambda f(x) = sum_i w_i e(lambda m_i) f(x - d_i)
//
// for a finite list of taps (modulation index m_i, shift d_i, weight w_i).
// The discrete Carleson kernel, the random operators with selector shifts and
// every term of their decompositions are tap lists; the maximal operators take
// the pointwise maximum of |T_lambda f| over a finite lambda set.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/lambda_sets.hpp"
#include "carleson/selector_process.hpp"
#include "carleson/signal.hpp"
#include "carleson/spectra.hpp"

namespace carleson {

enum class KernelKind {
  carleson,  // e(lambda m) / m, unit normalisation
  term_R0,   // c_alpha e(lambda m) / m
  t_full,    // X_|m| e(lambda m) / S_m, shift m
  term_R1,
  term_R2,
  term_R3,
  c_full,  // X_m e(lambda m) (f(x - S_m) - f(x + S_m)) / S_m, m > 0
  term_C1,
  term_C2,
  term_C3,
  term_C4,
};

inline constexpr std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::carleson: return "carleson";
    case KernelKind::term_R0: return "term_R0";
    case KernelKind::t_full: return "t_full";
    case KernelKind::term_R1: return "term_R1";
    case KernelKind::term_R2: return "term_R2";
    case KernelKind::term_R3: return "term_R3";
    case KernelKind::c_full: return "c_full";
    case KernelKind::term_C1: return "term_C1";
    case KernelKind::term_C2: return "term_C2";
    case KernelKind::term_C3: return "term_C3";
    case KernelKind::term_C4: return "term_C4";
  }
  return "?";
}

inline bool shifts_by_selector_sums(KernelKind k) {
  return k == KernelKind::c_full || k == KernelKind::term_C1 || k == KernelKind::term_C2 ||
         k == KernelKind::term_C3 || k == KernelKind::term_C4;
}

inline bool needs_path(KernelKind k) { return k != KernelKind::carleson && k != KernelKind::term_R0; }

/// The constant multiplying 1/m in the main term. 1 - alpha matches
/// sigma_m / W_m = (1 - alpha)/m + O(m^-2).
inline double main_term_constant(double alpha) { return 1.0 - alpha; }

struct ModulatedKernelSpec {
  KernelKind kind = KernelKind::carleson;
  double alpha = 0.5;
  SelectorPath const* path = nullptr;  // non-owning; required unless kind is carleson or term_R0
  std::optional<int> block_k;          // restrict to 2^k <= |m| < 2^(k+1)
  Index truncation = 1024;             // 0 < |m| <= truncation
  double normalization = 1.0;          // multiplies the carleson kind only
};

struct Tap {
  Index modulation;
  Index shift;
  double weight;
};

/// Coefficient mass omitted by truncation. For path kinds it is summed over
/// truncation < |m| <= path length; the deterministic 1/m kernels report an
/// infinite l1 tail and the exact l2 tail bound sqrt(2/M).
struct KernelTail {
  double l1 = 0.0;
  double l2 = 0.0;
};

class ModulatedKernel {
 public:
  ModulatedKernel() = default;
  explicit ModulatedKernel(std::vector<Tap> taps, KernelTail tail = {}) : taps_(std::move(taps)), tail_(tail) {
    for (auto const& t : taps_) {
      min_shift_ = std::min(min_shift_, t.shift);
      max_shift_ = std::max(max_shift_, t.shift);
    }
    if (taps_.empty()) min_shift_ = max_shift_ = 0;
  }

  std::vector<Tap> const& taps() const { return taps_; }
  KernelTail const& tail() const { return tail_; }
  bool empty() const { return taps_.empty(); }
  Index min_shift() const { return min_shift_; }
  Index max_shift() const { return max_shift_; }

  /// True when every tap is modulated by its own shift (e(lambda d) f(x - d)),
  /// so that lambda acts as a translation of the Fourier multiplier.
  bool translation_modulated() const {
    return std::all_of(taps_.begin(), taps_.end(), [](Tap const& t) { return t.modulation == t.shift; });
  }

  /// Convolution kernel K_lambda(d) = sum over taps with shift d of w e(lambda m).
  Signal kernel_at(double lambda) const {
    Signal k = Signal::zeros(min_shift_, max_shift_ + 1);
    for (auto const& t : taps_) k.at(t.shift) += t.weight * unit_exp(lambda, t.modulation);
    return k;
  }

  /// d/dlambda of kernel_at: sum of 2 pi i m w e(lambda m). With two_pi = false
  /// the factor 2 pi i is dropped (the "m times coefficient" symbol).
  Signal lambda_derivative_at(double lambda, bool two_pi_factor = true) const {
    Signal k = Signal::zeros(min_shift_, max_shift_ + 1);
    Complex const factor = two_pi_factor ? Complex(0.0, two_pi) : Complex(1.0, 0.0);
    for (auto const& t : taps_) {
      k.at(t.shift) += factor * (static_cast<double>(t.modulation) * t.weight) * unit_exp(lambda, t.modulation);
    }
    return k;
  }

  double l1_mass() const {
    double s = 0;
    for (auto const& t : taps_) s += std::abs(t.weight);
    return s;
  }

 private:
  std::vector<Tap> taps_;
  KernelTail tail_;
  Index min_shift_ = std::numeric_limits<Index>::max();
  Index max_shift_ = std::numeric_limits<Index>::min();
};

namespace detail {

inline double sgn(Index m) { return m > 0 ? 1.0 : -1.0; }

/// Weight of the kind at modulation index m (|m| in range), or nullopt when the
/// tap vanishes identically (X = 0 for selector-weighted kinds).
inline double t_family_weight(KernelKind kind, double alpha, double norm, SelectorPath const* path, Index m) {
  Index const a = m < 0 ? -m : m;
  double const c = main_term_constant(alpha);
  switch (kind) {
    case KernelKind::carleson: return norm / static_cast<double>(m);
    case KernelKind::term_R0: return c / static_cast<double>(m);
    case KernelKind::t_full: {
      if (path->x(a) == 0) return 0.0;
      Index const s = path->s(m);
      if (s == 0) throw std::logic_error("t_full: X_m = 1 with S_m = 0");
      return 1.0 / static_cast<double>(s);
    }
    case KernelKind::term_R1: return sgn(m) * (path->sigma(a) / path->w(a) - c / static_cast<double>(a));
    case KernelKind::term_R2: return sgn(m) * path->y(a) / path->w(a);
    case KernelKind::term_R3:
      if (path->x(a) == 0) return 0.0;
      return sgn(m) * (1.0 / static_cast<double>(path->s(a)) - 1.0 / path->w(a));
    default: break;
  }
  throw std::logic_error("t_family_weight: not a shift-by-m kind");
}

struct CTap {
  Index shift;  // positive shift; the tap pair is (+shift, w), (-shift, -w)
  double weight;
};

inline CTap c_family_tap(KernelKind kind, double alpha, SelectorPath const& path, Index m) {
  double const c = main_term_constant(alpha);
  Index const prev = path.s(m - 1) + 1;
  switch (kind) {
    case KernelKind::c_full: {
      if (path.x(m) == 0) return {path.s(m), 0.0};
      if (path.s(m) == 0) throw std::logic_error("c_full: X_m = 1 with S_m = 0");
      return {path.s(m), 1.0 / static_cast<double>(path.s(m))};
    }
    case KernelKind::term_C1:
      if (path.x(m) == 0) return {path.s(m), 0.0};
      return {path.s(m), 1.0 / static_cast<double>(path.s(m)) - 1.0 / path.w(m)};
    case KernelKind::term_C2: return {prev, path.sigma(m) / path.w(m) - c / static_cast<double>(m)};
    case KernelKind::term_C3: return {prev, path.y(m) / path.w(m)};
    case KernelKind::term_C4: return {prev, c / static_cast<double>(m)};
    default: break;
  }
  throw std::logic_error("c_family_tap: not a selector-shift kind");
}

}  // namespace detail

/// Tap list of the kind restricted to m_lo <= |m| <= m_hi (m > 0 only for the
/// selector-shift kinds, which are already antisymmetrised).
inline ModulatedKernel build_kernel_range(ModulatedKernelSpec const& spec, Index m_lo, Index m_hi) {
  if (needs_path(spec.kind) && spec.path == nullptr) {
    throw std::invalid_argument(std::string("build_kernel: kind ") + std::string(to_string(spec.kind)) + " needs a path");
  }
  if (spec.path != nullptr && needs_path(spec.kind) && m_hi > spec.path->length()) {
    throw std::invalid_argument("build_kernel: truncation exceeds path length");
  }
  double const alpha = spec.path != nullptr && needs_path(spec.kind) ? spec.path->alpha() : spec.alpha;
  m_lo = std::max<Index>(m_lo, 1);
  std::vector<Tap> taps;
  if (shifts_by_selector_sums(spec.kind)) {
    for (Index m = m_lo; m <= m_hi; ++m) {
      auto const t = detail::c_family_tap(spec.kind, alpha, *spec.path, m);
      if (t.weight == 0.0) continue;
      taps.push_back({m, t.shift, t.weight});
      taps.push_back({m, -t.shift, -t.weight});
    }
  } else {
    for (Index m = -m_hi; m <= m_hi; ++m) {
      Index const a = m < 0 ? -m : m;
      if (a < m_lo) continue;
      double const w = detail::t_family_weight(spec.kind, alpha, spec.normalization, spec.path, m);
      if (w != 0.0) taps.push_back({m, m, w});
    }
  }

  KernelTail tail;
  if (!needs_path(spec.kind)) {
    double const norm = spec.kind == KernelKind::term_R0 ? main_term_constant(alpha) : spec.normalization;
    tail.l1 = std::numeric_limits<double>::infinity();
    tail.l2 = std::abs(norm) * std::sqrt(2.0 / static_cast<double>(m_hi));
  } else {
    Index const n = spec.path->length();
    Index const end = spec.block_k ? std::min<Index>(n, (Index{1} << (*spec.block_k + 1)) - 1) : n;
    double l1 = 0, l2 = 0;
    for (Index m = m_hi + 1; m <= end; ++m) {
      double const w = shifts_by_selector_sums(spec.kind)
                           ? detail::c_family_tap(spec.kind, alpha, *spec.path, m).weight
                           : detail::t_family_weight(spec.kind, alpha, spec.normalization, spec.path, m);
      l1 += 2 * std::abs(w);
      l2 += 2 * w * w;
    }
    tail.l1 = l1;
    tail.l2 = std::sqrt(l2);
  }
  return ModulatedKernel(std::move(taps), tail);
}

inline ModulatedKernel build_kernel(ModulatedKernelSpec const& spec) {
  if (spec.truncation < 1) throw std::invalid_argument("build_kernel: truncation must be >= 1");
  if (spec.block_k) {
    if (*spec.block_k < 0 || *spec.block_k > 40) throw std::invalid_argument("build_kernel: block_k out of range");
    Index const lo = Index{1} << *spec.block_k;
    Index const hi = std::min<Index>((Index{1} << (*spec.block_k + 1)) - 1, spec.truncation);
    return build_kernel_range(spec, lo, hi);
  }
  return build_kernel_range(spec, 1, spec.truncation);
}

enum class EvalMethod { automatic, direct, spectral };

/// Direct evaluation: out(x + d) += w e(lambda m) f(x) for every tap.
inline Signal apply_direct(ModulatedKernel const& k, double lambda, Signal const& f) {
  if (f.empty() || k.empty()) return Signal::zeros(f.lo(), f.lo());
  Signal out = Signal::zeros(f.lo() + k.min_shift(), f.hi() + k.max_shift());
  auto& ov = out.values();
  auto const& fv = f.values();
  for (auto const& t : k.taps()) {
    Complex const c = t.weight * unit_exp(lambda, t.modulation);
    auto const base = static_cast<std::size_t>(f.lo() + t.shift - out.lo());
    for (std::size_t i = 0; i < fv.size(); ++i) ov[base + i] += c * fv[i];
  }
  return out;
}

/// FFT evaluation of the same convolution; output window identical to apply_direct.
inline Signal apply_spectral(ModulatedKernel const& k, double lambda, Signal const& f) {
  if (f.empty() || k.empty()) return Signal::zeros(f.lo(), f.lo());
  Signal const kern = k.kernel_at(lambda);
  auto conv = linear_convolution(kern.values(), f.values());
  return {f.lo() + k.min_shift(), std::move(conv)};
}

inline bool prefer_direct(ModulatedKernel const& k, Signal const& f) {
  double const direct_cost = static_cast<double>(k.taps().size()) * static_cast<double>(f.size());
  double const span = static_cast<double>(k.max_shift() - k.min_shift() + 1) + static_cast<double>(f.size());
  double const fft_cost = 12.0 * span * std::log2(std::max(2.0, span));
  return direct_cost <= fft_cost;
}

inline Signal apply(ModulatedKernel const& k, double lambda, Signal const& f, EvalMethod method = EvalMethod::automatic) {
  switch (method) {
    case EvalMethod::direct: return apply_direct(k, lambda, f);
    case EvalMethod::spectral: return apply_spectral(k, lambda, f);
    case EvalMethod::automatic: break;
  }
  return prefer_direct(k, f) ? apply_direct(k, lambda, f) : apply_spectral(k, lambda, f);
}

struct MaximalResult {
  Signal values;              // real, nonnegative
  std::vector<double> argmax;  // lambda attaining the maximum at each position
};

/// Pointwise max over the lambda set of |T_lambda f|. Ties keep the smallest lambda.
inline MaximalResult maximal(ModulatedKernel const& k, LambdaSet const& lambdas, Signal const& f,
                             EvalMethod method = EvalMethod::automatic) {
  if (lambdas.empty()) throw std::invalid_argument("maximal: empty lambda set");
  MaximalResult res;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    Signal const v = apply(k, lambdas[i], f, method);
    if (i == 0) {
      res.values = v.modulus();
      res.argmax.assign(v.size(), lambdas[0]);
      continue;
    }
    auto& rv = res.values.values();
    for (std::size_t n = 0; n < rv.size(); ++n) {
      double const a = std::abs(v.values()[n]);
      if (a > rv[n].real()) {
        rv[n] = a;
        res.argmax[n] = lambdas[i];
      }
    }
  }
  return res;
}

inline Signal eval_single_lambda(ModulatedKernelSpec const& spec, double lambda, Signal const& f,
                                 EvalMethod method = EvalMethod::automatic) {
  return apply(build_kernel(spec), lambda, f, method);
}

inline MaximalResult eval_maximal(ModulatedKernelSpec const& spec, LambdaSet const& lambdas, Signal const& f,
                                  EvalMethod method = EvalMethod::automatic) {
  return maximal(build_kernel(spec), lambdas, f, method);
}

/// Exact discrete Hardy-Littlewood maximal function on [out_lo, out_hi):
/// max over integer intervals I containing x of the mean of |f| on I. Intervals
/// reaching outside supp f and x only lose mass, so the search window is the
/// hull of both; the sweep is quadratic in its length.
inline Signal hardy_littlewood_max(Signal const& f, Index out_lo, Index out_hi) {
  if (out_hi < out_lo) throw std::invalid_argument("hardy_littlewood_max: empty output window");
  Signal out = Signal::zeros(out_lo, out_hi);
  Signal const t = f.trimmed();
  if (t.empty() || out_lo == out_hi) return out;
  Index const lo = std::min(t.lo(), out_lo);
  Index const hi = std::max(t.hi(), out_hi);
  auto const n = static_cast<std::size_t>(hi - lo);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + std::abs(t(lo + static_cast<Index>(i)));
  std::vector<double> best(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double run = 0.0;
    for (std::size_t b = n; b-- > a;) {
      double const avg = (prefix[b + 1] - prefix[a]) / static_cast<double>(b - a + 1);
      run = std::max(run, avg);
      best[b] = std::max(best[b], run);
    }
  }
  for (Index x = out_lo; x < out_hi; ++x) out.at(x) = best[static_cast<std::size_t>(x - lo)];
  return out;
}

inline Signal hardy_littlewood_max(Signal const& f) { return hardy_littlewood_max(f, f.lo(), f.hi()); }

/// P_k: modulated Y_m / W_m kernel on the block 2^k <= |m| < 2^(k+1).
inline ModulatedKernel p_k_kernel(SelectorPath const& path, int k) {
  if (k < 0 || (Index{1} << (k + 1)) > path.length()) {
    throw std::invalid_argument("P_k: block 2^(k+1) exceeds path length");
  }
  ModulatedKernelSpec spec{KernelKind::term_R2, path.alpha(), &path, k, (Index{1} << (k + 1)) - 1};
  return build_kernel(spec);
}

/// Q_k: Y_m e(lambda m)(f(x - S_{m-1} - 1) - f(x + S_{m-1} + 1)) / W_m, 2^k <= m <= 2^(k+1).
inline ModulatedKernel q_k_kernel(SelectorPath const& path, int k) {
  if (k < 0 || (Index{1} << (k + 1)) > path.length()) {
    throw std::invalid_argument("Q_k: block 2^(k+1) exceeds path length");
  }
  ModulatedKernelSpec spec{KernelKind::term_C3, path.alpha(), &path, std::nullopt, Index{1} << (k + 1)};
  return build_kernel_range(spec, Index{1} << k, Index{1} << (k + 1));
}

inline Signal block_P_k(SelectorPath const& path, LambdaSet const& lambdas, int k, Signal const& f) {
  return maximal(p_k_kernel(path, k), lambdas, f).values;
}

inline Signal block_Q_k(SelectorPath const& path, LambdaSet const& lambdas, int k, Signal const& f) {
  return maximal(q_k_kernel(path, k), lambdas, f).values;
}

// ---------------------------------------------------------------------------
// A_j coefficients

enum class AjSource { random, skeleton };

/// regrouped: m = a_{j-1}+1 .. a_j, the blocks on which S_{m-1} + 1 = j.
/// as_stated: m = a_{j-1} .. a_j - 1 (m = 0 omitted).
enum class BlockConvention { regrouped, as_stated };

struct AjCoefficients {
  double lambda = 0;
  AjSource source = AjSource::random;
  BlockConvention convention = BlockConvention::regrouped;
  std::vector<Complex> coeffs;  // coeffs[j], j = 1..j_max; coeffs[0] unused
  std::vector<Index> first_m;   // block bounds, inclusive; empty block when first > last
  std::vector<Index> last_m;

  Index j_max() const { return static_cast<Index>(coeffs.size()) - 1; }
};

namespace detail {

inline AjCoefficients aj_from_times(std::vector<Index> const& a, AjSource source, double lambda, Index j_max,
                                    BlockConvention conv) {
  if (j_max < 1) throw std::invalid_argument("aj_coefficients: j_max must be >= 1");
  if (j_max >= static_cast<Index>(a.size())) {
    throw std::invalid_argument("aj_coefficients: source covers only j <= " + std::to_string(a.size() - 1));
  }
  AjCoefficients out;
  out.lambda = lambda;
  out.source = source;
  out.convention = conv;
  auto const n = static_cast<std::size_t>(j_max);
  out.coeffs.assign(n + 1, Complex{});
  out.first_m.assign(n + 1, 0);
  out.last_m.assign(n + 1, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    Index first = conv == BlockConvention::regrouped ? a[j - 1] + 1 : std::max<Index>(a[j - 1], 1);
    Index last = conv == BlockConvention::regrouped ? a[j] : a[j] - 1;
    out.first_m[j] = first;
    out.last_m[j] = last;
    Complex acc{};
    for (Index m = first; m <= last; ++m) acc += unit_exp(lambda, m) / static_cast<double>(m);
    out.coeffs[j] = acc;
  }
  return out;
}

}  // namespace detail

inline AjCoefficients aj_coefficients(HittingTimes const& times, double lambda, Index j_max,
                                      BlockConvention conv = BlockConvention::regrouped) {
  return detail::aj_from_times(times.a, AjSource::random, lambda, j_max, conv);
}

/// Skeleton source: a_j replaced by p_j with p_0 = 0.
inline AjCoefficients aj_coefficients(DeterministicSkeleton const& sk, double lambda, Index j_max,
                                      BlockConvention conv = BlockConvention::regrouped) {
  return detail::aj_from_times(sk.p, AjSource::skeleton, lambda, j_max, conv);
}

struct AjIdentityReport {
  double residual = 0;          // max_x |LHS(x) - RHS(x)|
  Index matched_m = 0;          // LHS summed over 1 <= m <= matched_m = a_J
  Index blocks = 0;             // J = S_{m_max}
  double unmatched_tail = 0;    // sum of 1/m over matched_m < m <= m_max
};

/// Compares sum_{m=1}^{a_J} e(lambda m)/m (f(x - S_{m-1} - 1) - f(x + S_{m-1} + 1))
/// with sum_{j=1}^{J} A_j (f(x - j) - f(x + j)), J = S_{m_max}, using the
/// regrouped blocks. The part of 1..m_max beyond the last complete block is
/// reported as unmatched_tail rather than silently dropped.
inline AjIdentityReport aj_identity_check(SelectorPath const& path, double lambda, Signal const& f, Index m_max) {
  if (m_max < 1 || m_max > path.length()) throw std::invalid_argument("aj_identity_check: m_max outside path");
  AjIdentityReport rep;
  HittingTimes const times = hitting_times(path);
  rep.blocks = path.s(m_max);
  rep.matched_m = rep.blocks >= 1 ? times.a[static_cast<std::size_t>(rep.blocks)] : 0;
  for (Index m = rep.matched_m + 1; m <= m_max; ++m) rep.unmatched_tail += 1.0 / static_cast<double>(m);
  if (rep.blocks < 1 || f.empty()) return rep;

  std::vector<Tap> lhs_taps;
  for (Index m = 1; m <= rep.matched_m; ++m) {
    Index const d = path.s(m - 1) + 1;
    lhs_taps.push_back({m, d, 1.0 / static_cast<double>(m)});
    lhs_taps.push_back({m, -d, -1.0 / static_cast<double>(m)});
  }
  Signal const lhs = apply_direct(ModulatedKernel(std::move(lhs_taps)), lambda, f);

  AjCoefficients const aj = aj_coefficients(times, lambda, rep.blocks);
  Signal rhs = Signal::zeros(f.lo() - rep.blocks, f.hi() + rep.blocks);
  for (Index j = 1; j <= rep.blocks; ++j) {
    Complex const c = aj.coeffs[static_cast<std::size_t>(j)];
    for (Index n = f.lo(); n < f.hi(); ++n) {
      rhs.at(n + j) += c * f(n);
      rhs.at(n - j) -= c * f(n);
    }
  }
  rep.residual = max_abs_difference(lhs, rhs);
  return rep;
}

struct AjApproximationRow {
  Index j = 0;
  Complex coefficient;    // A_j over m = p_{j-1} .. p_j - 1
  Complex approximation;  // e(p_j lambda) D_{r_j}(-lambda) / p_{j-1}
  double error = 0;
  double scaled_error = 0;  // error * j^(1 + 1/(1-alpha))
};

struct AjApproximationReport {
  double lambda = 0;
  std::vector<AjApproximationRow> rows;
  std::vector<Index> skipped;  // j with p_{j-1} = 0 or r_j = 0, where the approximation is undefined
  double constant = 0;         // max scaled_error
};

/// Skeleton blocks against the Dirichlet-kernel approximation. The as-stated
/// block m = p_{j-1} .. p_j - 1 is the one the approximation is written for.
inline AjApproximationReport aj_skeleton_approximation(DeterministicSkeleton const& sk, double lambda, Index j_lo,
                                                       Index j_hi) {
  if (j_lo < 1 || j_hi > sk.j_max() || j_lo > j_hi) throw std::invalid_argument("aj_skeleton_approximation: bad j range");
  AjCoefficients const aj = aj_coefficients(sk, lambda, j_hi, BlockConvention::as_stated);
  AjApproximationReport rep;
  rep.lambda = lambda;
  double const expo = 1.0 + sk.exponent;
  for (Index j = j_lo; j <= j_hi; ++j) {
    auto const i = static_cast<std::size_t>(j);
    Index const prev = sk.p[i - 1];
    Index const r = sk.r[i];
    if (prev == 0 || r < 1) {
      rep.skipped.push_back(j);
      continue;
    }
    AjApproximationRow row;
    row.j = j;
    row.coefficient = aj.coeffs[i];
    row.approximation = unit_exp(lambda, sk.p[i]) * dirichlet(r, -lambda) / static_cast<double>(prev);
    row.error = std::abs(row.coefficient - row.approximation);
    row.scaled_error = row.error * std::pow(static_cast<double>(j), expo);
    rep.constant = std::max(rep.constant, row.scaled_error);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Arithmetic term with the skeleton phases

struct Lemma43Report {
  double epsilon = 0;
  double constant = 0;  // smallest K with LHS <= K log(1/eps) Mf pointwise
  Signal lhs;           // sup over the lambda grid, real
  Signal maximal;       // Hardy-Littlewood maximal function on the same window
  std::vector<double> lambda_grid;
  Index j_limit = 0;    // largest j summed at lambda = eps
};

/// sup over lambda in a uniform grid of [eps, 1/2] of
/// |sum_{1 < j < |lambda|^(-alpha/(1-alpha))} e(lambda p_j)/j (f(x+j) - f(x-j))|
/// and the constant relating it to log(1/eps) M f(x).
inline Lemma43Report lemma43_bound_check(DeterministicSkeleton const& sk, double epsilon, Signal const& f,
                                         std::size_t grid_points = 256) {
  if (!(epsilon > 0.0 && epsilon <= 0.25)) throw std::invalid_argument("lemma43_bound_check: eps must lie in (0, 1/4]");
  if (grid_points < 2) throw std::invalid_argument("lemma43_bound_check: need at least 2 grid points");
  double const power = sk.alpha / (1.0 - sk.alpha);
  auto j_bound = [power](double lam) { return std::pow(std::abs(lam), -power); };
  // j < bound, strictly.
  auto j_last = [&](double lam) {
    double const b = j_bound(lam);
    auto j = static_cast<Index>(std::ceil(b)) - 1;
    while (static_cast<double>(j + 1) < b) ++j;
    while (j >= 1 && !(static_cast<double>(j) < b)) --j;
    return j;
  };
  Lemma43Report rep;
  rep.epsilon = epsilon;
  rep.j_limit = j_last(epsilon);
  if (rep.j_limit > sk.j_max()) throw std::invalid_argument("lemma43_bound_check: skeleton too short for eps");

  for (std::size_t i = 0; i < grid_points; ++i) {
    double const lam = epsilon + (0.5 - epsilon) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    rep.lambda_grid.push_back(lam);
  }
  Signal const t = f.trimmed();
  Index const lo = (t.empty() ? 0 : t.lo()) - rep.j_limit;
  Index const hi = (t.empty() ? 0 : t.hi()) + rep.j_limit;
  rep.lhs = Signal::zeros(lo, hi);
  rep.maximal = hardy_littlewood_max(t, lo, hi);
  if (t.empty()) return rep;

  for (double lam : rep.lambda_grid) {
    Index const jl = j_last(lam);
    if (jl < 2) continue;
    std::vector<Tap> taps;
    for (Index j = 2; j <= jl; ++j) {
      double const w = 1.0 / static_cast<double>(j);
      Index const pj = sk.p[static_cast<std::size_t>(j)];
      // f(x + j) is a tap at shift -j; the phase depends on p_j, not on the shift.
      taps.push_back({pj, -j, w});
      taps.push_back({pj, j, -w});
    }
    Signal const v = apply_direct(ModulatedKernel(std::move(taps)), lam, t);
    for (Index x = v.lo(); x < v.hi(); ++x) {
      double const a = std::abs(v(x));
      if (a > rep.lhs(x).real()) rep.lhs.at(x) = a;
    }
  }
  double const log_eps = std::log(1.0 / epsilon);
  for (Index x = lo; x < hi; ++x) {
    double const mf = rep.maximal(x).real();
    if (mf > 0) rep.constant = std::max(rep.constant, rep.lhs(x).real() / (log_eps * mf));
  }
  return rep;
}

}  // namespace carleson
