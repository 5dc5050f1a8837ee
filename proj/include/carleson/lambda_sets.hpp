#pragma once

// Finite modulation sets in [-1/2, 1/2], covering numbers N(delta) and
// finite-scale Minkowski dimension profiles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "carleson/core.hpp"

namespace carleson {

class LambdaSet {
 public:
  LambdaSet() = default;

  /// Points are sorted and exact duplicates dropped. Every point must lie in
  /// [-1/2, 1/2].
  explicit LambdaSet(std::vector<double> points) : points_(std::move(points)) {
    for (double p : points_) {
      if (!(p >= -0.5 && p <= 0.5)) {
        throw std::invalid_argument("LambdaSet: point " + format_double(p) + " outside [-1/2, 1/2]");
      }
    }
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  std::vector<double> const& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }

  /// Largest eps with the set disjoint from (-eps, eps); 1/2 for the empty set.
  double origin_gap() const {
    double gap = 0.5;
    for (double p : points_) gap = std::min(gap, std::abs(p));
    return gap;
  }

 private:
  std::vector<double> points_;
};

/// Fewest intervals of length < delta covering the set. The greedy sweep opens
/// an interval at the leftmost uncovered point and absorbs every point closer
/// than delta to it, which is optimal in one dimension.
inline Index covering_number(LambdaSet const& lambda, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("covering_number: delta must lie in (0,1]");
  Index count = 0;
  double start = 0.0;
  for (double p : lambda.points()) {
    if (count == 0 || p - start >= delta) {
      ++count;
      start = p;
    }
  }
  return count;
}

struct CoverReport {
  std::vector<double> deltas;
  std::vector<Index> counts;
  double fitted_dimension = 0.0;
  std::vector<std::pair<double, double>> c_d_at;  // (d, max over probed scales of N(delta) delta^d)

  double c_d(double d) const {
    for (auto const& [dd, c] : c_d_at) {
      if (dd == d) return c;
    }
    throw std::out_of_range("CoverReport: dimension " + format_double(d) + " was not requested");
  }
};

inline double sup_count_times_scale(std::vector<double> const& deltas, std::vector<Index> const& counts, double d) {
  double best = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    best = std::max(best, static_cast<double>(counts[i]) * std::pow(deltas[i], d));
  }
  return best;
}

/// Least-squares slope of log N(delta) against log(1/delta) over the given
/// scales. The result is a finite-scale exponent, not a limit.
inline CoverReport dimension_profile(LambdaSet const& lambda, std::vector<double> const& scales,
                                     std::vector<double> const& candidate_dims = {}) {
  if (scales.size() < 3) throw std::invalid_argument("dimension_profile: need at least 3 scales");
  CoverReport rep;
  rep.deltas = scales;
  std::vector<double> lx, ly;
  for (double d : scales) {
    Index const n = covering_number(lambda, d);
    rep.counts.push_back(n);
    if (n > 0) {
      lx.push_back(std::log(1.0 / d));
      ly.push_back(std::log(static_cast<double>(n)));
    }
  }
  bool const all_equal = std::adjacent_find(rep.counts.begin(), rep.counts.end(), std::not_equal_to<>()) ==
                         rep.counts.end();
  if (!all_equal) {
    double const slope = least_squares(lx, ly).slope;
    rep.fitted_dimension = std::isnan(slope) ? 0.0 : std::max(0.0, slope);
  }
  for (double d : candidate_dims) rep.c_d_at.emplace_back(d, sup_count_times_scale(rep.deltas, rep.counts, d));
  return rep;
}

/// Geometric scales 2^-lo .. 2^-hi.
inline std::vector<double> dyadic_scales(int lo, int hi) {
  std::vector<double> out;
  for (int j = lo; j <= hi; ++j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

/// {offset + ratio^j : 1 <= j <= count}; finite, so dimension 0.
inline LambdaSet make_lacunary(int count, double ratio, double offset = 0.0) {
  if (count < 1) throw std::invalid_argument("make_lacunary: count must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("make_lacunary: ratio must lie in (0,1)");
  std::vector<double> pts;
  double v = 1.0;
  for (int j = 1; j <= count; ++j) {
    v *= ratio;
    pts.push_back(offset + v);
  }
  return LambdaSet(std::move(pts));
}

/// Endpoints of the 2^level intervals of a middle-removed Cantor construction
/// on [lo, hi] keeping a fraction `ratio` at each side. Dimension log2 / log(1/ratio).
inline LambdaSet make_cantor(int level, double ratio, double lo, double hi) {
  if (level < 0 || level > 24) throw std::invalid_argument("make_cantor: level must lie in 0..24");
  if (!(ratio > 0.0 && ratio < 0.5)) throw std::invalid_argument("make_cantor: ratio must lie in (0, 1/2)");
  if (!(lo < hi)) throw std::invalid_argument("make_cantor: empty base interval");
  std::vector<std::pair<double, double>> cur{{lo, hi}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<double, double>> next;
    next.reserve(cur.size() * 2);
    for (auto const& [a, b] : cur) {
      double const len = (b - a) * ratio;
      next.emplace_back(a, a + len);
      next.emplace_back(b - len, b);
    }
    cur = std::move(next);
  }
  std::vector<double> pts;
  for (auto const& [a, b] : cur) {
    pts.push_back(a);
    pts.push_back(b);
  }
  return LambdaSet(std::move(pts));
}

/// count equispaced points spanning [origin_gap, 1/2]; dimension 1 in the limit.
inline LambdaSet make_arithmetic_grid(int count, double origin_gap) {
  if (count < 1) throw std::invalid_argument("make_arithmetic_grid: count must be >= 1");
  if (!(origin_gap >= 0.0 && origin_gap <= 0.5)) throw std::invalid_argument("make_arithmetic_grid: gap must lie in [0, 1/2]");
  std::vector<double> pts;
  if (count == 1) {
    pts.push_back(origin_gap);
  } else {
    double const step = (0.5 - origin_gap) / (count - 1);
    for (int i = 0; i < count; ++i) pts.push_back(i + 1 == count ? 0.5 : origin_gap + step * i);
  }
  return LambdaSet(std::move(pts));
}

inline void write_lambda_set(std::ostream& os, LambdaSet const& lambda) {
  for (double p : lambda.points()) os << format_double(p) << '\n';
}

inline LambdaSet read_lambda_set(std::istream& is) {
  std::vector<double> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    pts.push_back(parse_double(line));
  }
  return LambdaSet(std::move(pts));
}

inline void write_cover_report(std::ostream& os, CoverReport const& rep) {
  os << "# fitted_dimension=" << format_double(rep.fitted_dimension) << '\n';
  for (auto const& [d, c] : rep.c_d_at) os << "# c_d(" << format_double(d) << ")=" << format_double(c) << '\n';
  os << "delta,count\n";
  for (std::size_t i = 0; i < rep.deltas.size(); ++i) os << format_double(rep.deltas[i]) << ',' << rep.counts[i] << '\n';
}

}  // namespace carleson
