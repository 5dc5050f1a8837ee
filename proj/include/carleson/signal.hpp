#pragma once

// Finitely supported complex signals on a window [offset, offset + size) of Z.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "carleson/core.hpp"

namespace carleson {

class Signal {
 public:
  Signal() = default;
  Signal(Index offset, std::vector<Complex> values) : offset_(offset), values_(std::move(values)) {}

  /// Zero signal on [lo, hi).
  static Signal zeros(Index lo, Index hi) {
    if (hi < lo) throw std::invalid_argument("Signal::zeros: hi < lo");
    return {lo, std::vector<Complex>(static_cast<std::size_t>(hi - lo))};
  }
  static Signal delta(Index at, Complex value = 1.0) { return {at, {value}}; }
  static Signal from_real(Index offset, std::vector<double> const& values) {
    return {offset, std::vector<Complex>(values.begin(), values.end())};
  }

  Index offset() const { return offset_; }
  Index lo() const { return offset_; }
  Index hi() const { return offset_ + static_cast<Index>(values_.size()); }  // exclusive
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  bool contains(Index n) const { return n >= lo() && n < hi(); }

  std::vector<Complex> const& values() const { return values_; }
  std::vector<Complex>& values() { return values_; }

  /// Value at n; zero outside the window.
  Complex operator()(Index n) const {
    return contains(n) ? values_[static_cast<std::size_t>(n - offset_)] : Complex{};
  }
  Complex& at(Index n) {
    if (!contains(n)) throw std::out_of_range("Signal::at: position outside window");
    return values_[static_cast<std::size_t>(n - offset_)];
  }

  /// l^p norm over the window; p = infinity gives the max modulus.
  double norm(double p) const {
    if (std::isinf(p)) {
      double m = 0;
      for (auto const& v : values_) m = std::max(m, std::abs(v));
      return m;
    }
    if (!(p >= 1.0)) throw std::invalid_argument("Signal::norm: p must be >= 1");
    CompensatedSum s;
    if (p == 2.0) {
      for (auto const& v : values_) s.add(std::norm(v));
      return std::sqrt(s.value());
    }
    for (auto const& v : values_) s.add(std::pow(std::abs(v), p));
    return std::pow(s.value(), 1.0 / p);
  }

  /// Smallest window [lo, hi) holding every nonzero entry; empty signal if none.
  Signal trimmed() const {
    std::size_t first = 0;
    while (first < values_.size() && values_[first] == Complex{}) ++first;
    if (first == values_.size()) return {};
    std::size_t last = values_.size();
    while (values_[last - 1] == Complex{}) --last;
    return {offset_ + static_cast<Index>(first),
            std::vector<Complex>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                 values_.begin() + static_cast<std::ptrdiff_t>(last))};
  }

  /// Copy re-windowed to [lo, hi); entries outside the old window are zero.
  Signal windowed(Index lo, Index hi) const {
    Signal out = zeros(lo, hi);
    for (Index n = std::max(lo, this->lo()); n < std::min(hi, this->hi()); ++n) out.at(n) = (*this)(n);
    return out;
  }

  Signal modulus() const {
    Signal out(offset_, values_);
    for (auto& v : out.values_) v = std::abs(v);
    return out;
  }

  Signal& operator*=(Complex c) {
    for (auto& v : values_) v *= c;
    return *this;
  }

 private:
  Index offset_ = 0;
  std::vector<Complex> values_;
};

/// Sum of two signals on the union window.
inline Signal operator+(Signal const& a, Signal const& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Index const lo = std::min(a.lo(), b.lo());
  Index const hi = std::max(a.hi(), b.hi());
  Signal out = Signal::zeros(lo, hi);
  for (Index n = lo; n < hi; ++n) out.at(n) = a(n) + b(n);
  return out;
}

inline Signal operator-(Signal const& a, Signal const& b) {
  Signal nb = b;
  nb *= -1.0;
  return a + nb;
}

/// max_n |a(n) - b(n)| over the union of the windows.
inline double max_abs_difference(Signal const& a, Signal const& b) {
  if (a.empty() && b.empty()) return 0.0;
  Index const lo = std::min(a.empty() ? b.lo() : a.lo(), b.empty() ? a.lo() : b.lo());
  Index const hi = std::max(a.empty() ? b.hi() : a.hi(), b.empty() ? a.hi() : b.hi());
  double m = 0;
  for (Index n = lo; n < hi; ++n) m = std::max(m, std::abs(a(n) - b(n)));
  return m;
}

/// <f, g> = sum_n f(n) conj(g(n)).
inline Complex pairing(Signal const& f, Signal const& g) {
  Complex acc{};
  Index const lo = std::max(f.lo(), g.lo());
  Index const hi = std::min(f.hi(), g.hi());
  for (Index n = lo; n < hi; ++n) acc += f(n) * std::conj(g(n));
  return acc;
}

/// Text record: "signal <offset> <count>" then one "re im" line per entry.
inline void write_signal(std::ostream& os, Signal const& f) {
  os << "signal " << f.offset() << ' ' << f.size() << '\n';
  for (auto const& v : f.values()) os << format_double(v.real()) << ' ' << format_double(v.imag()) << '\n';
}

inline Signal read_signal(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && (line.empty() || line.front() == '#')) {
  }
  std::istringstream head(line);
  std::string tag;
  Index offset = 0, count = -1;
  if (!(head >> tag >> offset >> count) || tag != "signal" || count < 0) {
    throw std::invalid_argument("read_signal: expected 'signal <offset> <count>' header");
  }
  std::vector<Complex> values;
  values.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("read_signal: truncated record");
    std::istringstream row(line);
    std::string re, im;
    if (!(row >> re >> im)) throw std::invalid_argument("read_signal: malformed entry '" + line + "'");
    values.emplace_back(parse_double(re), parse_double(im));
  }
  return {offset, std::move(values)};
}

}  // namespace carleson
