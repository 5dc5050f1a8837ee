#pragma once

// Fourier transform F f(beta) = sum_n f(n) e(-beta n) sampled on a uniform
// grid of the torus, certified sup-norm bounds for the sampled trigonometric
// polynomials, and the Dirichlet kernel D_n(theta) = sum_{m=1}^n e(theta m).
//
// Direct summation is the reference evaluator. Power-of-two grids may take the
// FFTW path; both are exact for every G because the grid transform only sees
// f(n) through n mod G.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/signal.hpp"

namespace carleson {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex FFT of one fixed size and sign. FFTW_ESTIMATE keeps the
/// chosen algorithm independent of timing, hence bit-reproducible.
class FftPlan {
 public:
  FftPlan(std::size_t n, int sign) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    buffer_ = fftw_alloc_complex(n);
    if (buffer_ == nullptr) throw std::bad_alloc();
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, sign, FFTW_ESTIMATE);
    if (plan_ == nullptr) {
      fftw_free(buffer_);
      throw std::runtime_error("FFTW planning failed");
    }
  }
  FftPlan(FftPlan const&) = delete;
  FftPlan& operator=(FftPlan const&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buffer_);
  }

  void run(std::span<Complex> data) {
    if (data.size() != n_) throw std::invalid_argument("FftPlan::run: size mismatch");
    auto* buf = reinterpret_cast<Complex*>(buffer_);
    std::copy(data.begin(), data.end(), buf);
    fftw_execute(plan_);
    std::copy(buf, buf + n_, data.begin());
  }

 private:
  std::size_t n_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan plan_ = nullptr;
};

inline FftPlan& cached_plan(std::size_t n, int sign) {
  thread_local std::map<std::pair<std::size_t, int>, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[{n, sign}];
  if (!slot) slot = std::make_unique<FftPlan>(n, sign);
  return *slot;
}

}  // namespace detail

/// Unnormalized transform: sign -1 computes sum_k x[k] e(-gk/n), +1 the conjugate kernel.
inline void fft_inplace(std::span<Complex> data, int sign) {
  if (data.empty()) return;
  detail::cached_plan(data.size(), sign == -1 ? FFTW_FORWARD : FFTW_BACKWARD).run(data);
}

/// Full linear convolution (size a + b - 1) through a zero-padded FFT.
inline std::vector<Complex> linear_convolution(std::span<Complex const> a, std::span<Complex const> b) {
  if (a.empty() || b.empty()) return {};
  std::size_t const out = a.size() + b.size() - 1;
  std::size_t const n = next_power_of_two(out);
  std::vector<Complex> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft_inplace(fa, -1);
  fft_inplace(fb, -1);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, +1);
  double const scale = 1.0 / static_cast<double>(n);
  std::vector<Complex> res(out);
  for (std::size_t i = 0; i < out; ++i) res[i] = fa[i] * scale;
  return res;
}

class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::size_t resolution) : resolution_(resolution) {
    if (resolution == 0) throw std::invalid_argument("FrequencyGrid: resolution must be positive");
  }
  std::size_t resolution() const { return resolution_; }
  double spacing() const { return 1.0 / static_cast<double>(resolution_); }
  /// g / G - 1/2.
  double node(std::size_t g) const { return static_cast<double>(g) / static_cast<double>(resolution_) - 0.5; }

 private:
  std::size_t resolution_;
};

struct SpectrumSample {
  FrequencyGrid grid{1};
  std::vector<Complex> values;
  /// 2 pi sum_n |n| |f(n)|: bounds the derivative of the sampled polynomial.
  double lipschitz_bound = 0.0;
  /// Half the width of the frequency support; after recentring the sampled
  /// function is of exponential type 2 pi * bandwidth (Bernstein).
  double bandwidth = 0.0;

  double grid_max() const {
    double m = 0;
    for (auto const& v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

enum class DftMethod { automatic, direct, fast };

inline SpectrumSample dft(Signal const& f, FrequencyGrid const& grid, DftMethod method = DftMethod::automatic) {
  SpectrumSample out;
  out.grid = grid;
  std::size_t const G = grid.resolution();
  out.values.assign(G, Complex{});

  Signal const t = f.trimmed();
  double lip = 0.0;
  for (Index n = t.lo(); n < t.hi(); ++n) lip += std::abs(static_cast<double>(n)) * std::abs(t(n));
  out.lipschitz_bound = two_pi * lip;
  out.bandwidth = t.empty() ? 0.0 : 0.5 * static_cast<double>(t.hi() - 1 - t.lo());
  if (t.empty()) return out;

  bool const use_fast =
      method == DftMethod::fast || (method == DftMethod::automatic && is_power_of_two(G) && G >= 64);
  if (use_fast) {
    // e(-beta_g n) = e(-g n / G) (-1)^n: fold (-1)^n f(n) onto n mod G, then FFT.
    auto const g_index = static_cast<Index>(G);
    for (Index n = t.lo(); n < t.hi(); ++n) {
      Index k = n % g_index;
      if (k < 0) k += g_index;
      double const sign = (n % 2 == 0) ? 1.0 : -1.0;
      out.values[static_cast<std::size_t>(k)] += sign * t(n);
    }
    fft_inplace(out.values, -1);
    return out;
  }
  for (std::size_t g = 0; g < G; ++g) {
    double const beta = grid.node(g);
    Complex acc{};
    for (Index n = t.lo(); n < t.hi(); ++n) {
      Complex const v = t(n);
      if (v != Complex{}) acc += v * unit_exp(-beta, n);
    }
    out.values[g] = acc;
  }
  return out;
}

/// max_g |values| + L / (2G): first-order certified bound.
inline double lipschitz_padded_supnorm(SpectrumSample const& s) {
  return s.grid_max() + s.lipschitz_bound / (2.0 * static_cast<double>(s.grid.resolution()));
}

/// Second-order certified bound. At the maximiser theta* of |p| the real
/// trigonometric polynomial q = Re(conj(u) p), u = p(theta*)/|p(theta*)|, has a
/// critical point, and Bernstein gives |q''| <= (2 pi h)^2 sup|p|, so the node
/// nearest theta* satisfies |p| >= sup|p| (1 - (pi h / G)^2 / 2). Infinite when
/// the grid is too coarse for the bandwidth h.
inline double bernstein_padded_supnorm(SpectrumSample const& s) {
  double const kappa = 0.5 * std::pow(std::numbers::pi * s.bandwidth / static_cast<double>(s.grid.resolution()), 2);
  if (!(kappa < 1.0)) return std::numeric_limits<double>::infinity();
  return s.grid_max() / (1.0 - kappa);
}

/// Certified upper bound on the continuum sup-norm: the smaller of the
/// first-order Lipschitz padding and the second-order Bernstein padding.
inline double padded_supnorm(SpectrumSample const& s) {
  if (!std::isfinite(s.lipschitz_bound)) throw std::invalid_argument("padded_supnorm: Lipschitz bound not finite");
  return std::min(lipschitz_padded_supnorm(s), bernstein_padded_supnorm(s));
}

/// D_n(theta) = sum_{m=1}^n e(theta m) = e(theta (n+1)/2) sin(pi n theta) / sin(pi theta).
/// Uses a Taylor expansion when n * dist(theta, Z) is tiny.
inline Complex dirichlet(Index n, double theta) {
  if (n < 1) throw std::invalid_argument("dirichlet: n must be >= 1");
  double const t = theta - std::round(theta);
  auto const nd = static_cast<double>(n);
  if (t == 0.0) return nd;
  if (std::abs(t) * nd < 1e-4) {
    // sum_m e(tm) = sum_k (2 pi i t)^k / k! * sum_m m^k, truncated at k = 3.
    double const s1 = nd * (nd + 1) / 2;
    double const s2 = nd * (nd + 1) * (2 * nd + 1) / 6;
    double const s3 = s1 * s1;
    double const x = two_pi * t;
    return {nd - x * x / 2 * s2, x * s1 - x * x * x / 6 * s3};
  }
  double const ratio = std::sin(std::numbers::pi * nd * t) / std::sin(std::numbers::pi * t);
  return unit_exp(t * (nd + 1) / 2) * ratio;
}

}  // namespace carleson
