#pragma once

// Shared numeric helpers: the unit exponential e(t), compensated summation,
// least-squares slopes and round-trip number formatting.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace carleson {

using Complex = std::complex<double>;
using Index = std::int64_t;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// e(t) = exp(2 pi i t). The argument is reduced mod 1 first so that large
/// integer phases (e.g. lambda * p_j with p_j ~ 1e9) keep full precision.
inline Complex unit_exp(double t) {
  double const frac = t - std::round(t);
  return {std::cos(two_pi * frac), std::sin(two_pi * frac)};
}

/// e(lambda * m) with the product reduced exactly for integer m.
inline Complex unit_exp(double lambda, Index m) {
  // fma keeps the rounding error of lambda*m out of the fractional part.
  double const prod = lambda * static_cast<double>(m);
  double const err = std::fma(lambda, static_cast<double>(m), -prod);
  double const frac = (prod - std::round(prod)) + err;
  return {std::cos(two_pi * frac), std::sin(two_pi * frac)};
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double const t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

/// Ordinary least squares y ~ intercept + slope * x. Returns NaNs when the
/// abscissae are all equal or fewer than two points are given.
inline LineFit least_squares(std::span<double const> x, std::span<double const> y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
  std::size_t const n = x.size();
  if (n < 2) return {};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return {};
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

/// Shortest representation that round-trips through strtod.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  double v = 0;
  auto const* first = text.data();
  auto const* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto const res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline Index parse_index(std::string_view text) {
  Index v = 0;
  auto const* first = text.data();
  auto const* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto const res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace carleson
