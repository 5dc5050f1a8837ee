#pragma once

// Sparse collections of dyadic intervals, the sparse bilinear form
// Pi_{S,r}(f,g) = sum_I <f>_{I,r} <g>_{I,r} |I|, stopping-time certificates
// |<Tf,g>| <= K Pi_{S,r}(f,g), and Muckenhoupt / reverse Hoelder
// characteristics of weights on a finite window.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/rng.hpp"
#include "carleson/signal.hpp"

namespace carleson {

/// [position 2^scale, (position + 1) 2^scale) relative to a grid origin.
struct DyadicInterval {
  int scale = 0;
  Index position = 0;

  Index length() const { return Index{1} << scale; }
  Index lo(Index origin = 0) const { return origin + position * length(); }
  Index hi(Index origin = 0) const { return lo(origin) + length(); }
  bool contains(DyadicInterval const& other) const {
    return other.scale <= scale && (other.position >> (scale - other.scale)) == position;
  }
  DyadicInterval left_child() const { return {scale - 1, 2 * position}; }
  DyadicInterval right_child() const { return {scale - 1, 2 * position + 1}; }

  friend bool operator==(DyadicInterval const&, DyadicInterval const&) = default;
  friend auto operator<=>(DyadicInterval const& a, DyadicInterval const& b) {
    if (a.scale != b.scale) return b.scale <=> a.scale;  // larger intervals first
    return a.position <=> b.position;
  }
};

/// Half-open integer range [lo, hi).
struct IndexRange {
  Index lo = 0;
  Index hi = 0;
  Index size() const { return hi - lo; }
  friend bool operator==(IndexRange const&, IndexRange const&) = default;
};

struct SparseEntry {
  DyadicInterval interval;
  std::vector<IndexRange> witness;  // E(I), a union of disjoint ranges inside I

  Index witness_size() const {
    Index n = 0;
    for (auto const& r : witness) n += r.size();
    return n;
  }
};

struct SparseCollection {
  Index origin = 0;
  std::vector<SparseEntry> entries;

  IndexRange bounds(DyadicInterval const& I) const { return {I.lo(origin), I.hi(origin)}; }
};

struct SparseVerification {
  bool valid = true;
  std::vector<std::string> violations;
  std::optional<Index> shared_point;  // a point claimed by two witness sets, if any
};

/// Witness sets inside their intervals, pairwise disjoint, and |E(I)| > |I|/10 strictly.
inline SparseVerification verify_sparse(SparseCollection const& s) {
  SparseVerification rep;
  auto fail = [&rep](std::string msg) {
    rep.valid = false;
    rep.violations.push_back(std::move(msg));
  };
  struct Owned {
    IndexRange range;
    std::size_t owner;
  };
  std::vector<Owned> all;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    auto const& e = s.entries[i];
    if (e.interval.scale < 0 || e.interval.scale > 62) {
      fail("entry " + std::to_string(i) + ": scale out of range");
      continue;
    }
    IndexRange const b = s.bounds(e.interval);
    for (auto const& r : e.witness) {
      if (r.lo >= r.hi) fail("entry " + std::to_string(i) + ": empty witness range");
      if (r.lo < b.lo || r.hi > b.hi) fail("entry " + std::to_string(i) + ": witness outside interval");
      all.push_back({r, i});
    }
    if (10 * e.witness_size() <= e.interval.length()) {
      fail("entry " + std::to_string(i) + ": witness density " + std::to_string(e.witness_size()) + "/" +
           std::to_string(e.interval.length()) + " not above 1/10");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (s.entries[j].interval == e.interval) fail("entry " + std::to_string(i) + ": duplicate interval");
    }
  }
  std::sort(all.begin(), all.end(), [](Owned const& a, Owned const& b) { return a.range.lo < b.range.lo; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].range.lo < all[i - 1].range.hi) {
      Index const p = all[i].range.lo;
      if (!rep.shared_point) rep.shared_point = p;
      fail("witness point " + std::to_string(p) + " shared by entries " + std::to_string(all[i - 1].owner) + " and " +
           std::to_string(all[i].owner));
    }
  }
  return rep;
}

/// <f>_{[lo,hi),r} = (|I|^-1 sum_{n in I} |f(n)|^r)^(1/r).
inline double local_average(Signal const& f, IndexRange I, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("local_average: r must be >= 1");
  if (I.size() <= 0) throw std::invalid_argument("local_average: empty interval");
  CompensatedSum s;
  Index const lo = std::max(I.lo, f.lo());
  Index const hi = std::min(I.hi, f.hi());
  for (Index n = lo; n < hi; ++n) s.add(std::pow(std::abs(f(n)), r));
  return std::pow(s.value() / static_cast<double>(I.size()), 1.0 / r);
}

/// Pi_{S,r}(f, g). Rejects collections failing verify_sparse.
inline double sparse_form(SparseCollection const& s, Signal const& f, Signal const& g, double r) {
  auto const v = verify_sparse(s);
  if (!v.valid) throw std::invalid_argument("sparse_form: invalid collection: " + v.violations.front());
  CompensatedSum sum;
  for (auto const& e : s.entries) {
    IndexRange const b = s.bounds(e.interval);
    sum.add(local_average(f, b, r) * local_average(g, b, r) * static_cast<double>(b.size()));
  }
  return sum.value();
}

inline void write_sparse_collection(std::ostream& os, SparseCollection const& s) {
  os << "# origin=" << s.origin << '\n';
  os << "scale,position,witness\n";
  for (auto const& e : s.entries) {
    os << e.interval.scale << ',' << e.interval.position << ',';
    for (std::size_t i = 0; i < e.witness.size(); ++i) {
      if (i) os << ';';
      os << e.witness[i].lo << ':' << e.witness[i].hi;
    }
    os << '\n';
  }
}

inline SparseCollection read_sparse_collection(std::istream& is) {
  SparseCollection s;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("# origin=", 0) == 0) s.origin = parse_index(line.substr(9));
      continue;
    }
    if (!header) {
      if (line != "scale,position,witness") throw std::invalid_argument("read_sparse_collection: bad header");
      header = true;
      continue;
    }
    auto const c1 = line.find(',');
    auto const c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("read_sparse_collection: malformed row '" + line + "'");
    }
    SparseEntry e;
    e.interval.scale = static_cast<int>(parse_index(line.substr(0, c1)));
    e.interval.position = parse_index(line.substr(c1 + 1, c2 - c1 - 1));
    std::istringstream ws(line.substr(c2 + 1));
    std::string part;
    while (std::getline(ws, part, ';')) {
      auto const colon = part.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("read_sparse_collection: bad range '" + part + "'");
      e.witness.push_back({parse_index(part.substr(0, colon)), parse_index(part.substr(colon + 1))});
    }
    s.entries.push_back(std::move(e));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Stopping-time certificates

struct CertificateOptions {
  double threshold = 4.0;
  int max_depth = 64;
};

struct SparseCertificate {
  SparseCollection collection;
  double r = 1.0;
  double pairing = 0.0;   // |<Tf, g>|
  double form = 0.0;      // Pi_{S,r}(f, g)
  double constant = 0.0;  // pairing / form
  double max_threshold = 0.0;  // largest stopping threshold used after escalation
  bool partial = false;   // depth limit reached
};

namespace detail {

/// Prefix sums of |h|^r on [lo, hi), for O(1) averages.
class PowerPrefix {
 public:
  PowerPrefix(Signal const& h, Index lo, Index hi, double r) : lo_(lo), r_(r) {
    prefix_.assign(static_cast<std::size_t>(hi - lo) + 1, 0.0);
    for (Index n = lo; n < hi; ++n) {
      auto const i = static_cast<std::size_t>(n - lo);
      prefix_[i + 1] = prefix_[i] + std::pow(std::abs(h(n)), r);
    }
  }
  /// Average over [a, b) intersected with the prefix window; points outside count as zero.
  double average(Index a, Index b) const {
    Index const hi = lo_ + static_cast<Index>(prefix_.size()) - 1;
    Index const ca = std::clamp(a, lo_, hi);
    Index const cb = std::clamp(b, lo_, hi);
    double const mass = prefix_[static_cast<std::size_t>(cb - lo_)] - prefix_[static_cast<std::size_t>(ca - lo_)];
    return std::pow(std::max(mass, 0.0) / static_cast<double>(b - a), 1.0 / r_);
  }

 private:
  Index lo_;
  double r_;
  std::vector<double> prefix_;
};

}  // namespace detail

/// Calderon-Zygmund stopping construction. The top interval is the smallest
/// dyadic interval (grid origin at the left end of the joint support) holding
/// supp f and supp g. Inside a selected I, the maximal dyadic J with
/// <f>_{3J,r} > t <f>_{3I,r} or <g>_{J,r} > t <g>_{I,r} become its stopping
/// children and E(I) is I minus their union. If the children cover more than
/// half of I the threshold t is doubled for that I, so |E(I)| >= |I|/2.
inline SparseCertificate sparse_certificate(std::function<Signal(Signal const&)> const& op, Signal const& f,
                                            Signal const& g, double r, CertificateOptions const& opts = {}) {
  if (!(r >= 1.0 && r < 2.0)) throw std::invalid_argument("sparse_certificate: r must lie in [1, 2)");
  if (!(opts.threshold > 1.0)) throw std::invalid_argument("sparse_certificate: threshold must exceed 1");
  SparseCertificate cert;
  cert.r = r;
  Signal const ft = f.trimmed();
  Signal const gt = g.trimmed();
  cert.pairing = std::abs(pairing(op(f), g));
  if (ft.empty() || gt.empty()) {
    cert.constant = cert.pairing == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return cert;
  }
  Index const lo = std::min(ft.lo(), gt.lo());
  Index const hi = std::max(ft.hi(), gt.hi());
  int top_scale = 0;
  while ((Index{1} << top_scale) < hi - lo) ++top_scale;
  cert.collection.origin = lo;
  Index const len = Index{1} << top_scale;

  detail::PowerPrefix const pf(ft, lo - len, lo + 2 * len, r);
  detail::PowerPrefix const pg(gt, lo, lo + len, r);
  auto const& origin = cert.collection.origin;
  auto avg_f3 = [&](DyadicInterval const& J) { return pf.average(J.lo(origin) - J.length(), J.hi(origin) + J.length()); };
  auto avg_g = [&](DyadicInterval const& J) { return pg.average(J.lo(origin), J.hi(origin)); };

  struct Pending {
    DyadicInterval interval;
    int depth;
  };
  std::vector<Pending> stack{{{top_scale, 0}, 0}};
  while (!stack.empty()) {
    auto const [I, depth] = stack.back();
    stack.pop_back();
    double const ref_f = avg_f3(I);
    double const ref_g = avg_g(I);
    double t = opts.threshold;
    std::vector<DyadicInterval> children;
    for (;;) {
      children.clear();
      Index covered = 0;
      std::vector<DyadicInterval> scan;
      if (I.scale > 0) scan = {I.right_child(), I.left_child()};
      while (!scan.empty()) {
        DyadicInterval const J = scan.back();
        scan.pop_back();
        if (avg_f3(J) > t * ref_f || avg_g(J) > t * ref_g) {
          children.push_back(J);
          covered += J.length();
        } else if (J.scale > 0) {
          scan.push_back(J.right_child());
          scan.push_back(J.left_child());
        }
      }
      if (2 * covered <= I.length()) break;
      t *= 2;
    }
    cert.max_threshold = std::max(cert.max_threshold, t);
    std::sort(children.begin(), children.end(),
              [](DyadicInterval const& a, DyadicInterval const& b) { return a.lo() < b.lo(); });

    SparseEntry e{I, {}};
    Index cursor = I.lo(origin);
    for (auto const& J : children) {
      if (J.lo(origin) > cursor) e.witness.push_back({cursor, J.lo(origin)});
      cursor = J.hi(origin);
    }
    if (cursor < I.hi(origin)) e.witness.push_back({cursor, I.hi(origin)});
    cert.collection.entries.push_back(std::move(e));

    if (depth + 1 > opts.max_depth) {
      if (!children.empty()) cert.partial = true;
      continue;
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back({*it, depth + 1});
  }
  std::sort(cert.collection.entries.begin(), cert.collection.entries.end(),
            [](SparseEntry const& a, SparseEntry const& b) { return a.interval < b.interval; });
  cert.form = sparse_form(cert.collection, f, g, r);
  cert.constant = cert.form > 0 ? cert.pairing / cert.form
                                : (cert.pairing == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return cert;
}

// ---------------------------------------------------------------------------
// Weights

class Weight {
 public:
  Weight(Index offset, std::vector<double> values) : offset_(offset), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Weight: empty window");
    for (double v : values_) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("Weight: values must be positive and finite");
    }
  }

  /// (1 + |n|)^gamma on [lo, hi).
  static Weight power(Index lo, Index hi, double gamma) {
    if (hi <= lo) throw std::invalid_argument("Weight::power: empty window");
    std::vector<double> v;
    for (Index n = lo; n < hi; ++n) v.push_back(std::pow(1.0 + std::abs(static_cast<double>(n)), gamma));
    return {lo, std::move(v)};
  }

  Index lo() const { return offset_; }
  Index hi() const { return offset_ + static_cast<Index>(values_.size()); }
  std::size_t size() const { return values_.size(); }
  double operator()(Index n) const { return values_.at(static_cast<std::size_t>(n - offset_)); }
  std::vector<double> const& values() const { return values_; }

  Weight scaled(double c) const {
    std::vector<double> v = values_;
    for (auto& x : v) x *= c;
    return {offset_, std::move(v)};
  }

 private:
  Index offset_;
  std::vector<double> values_;
};

/// Maximum of a characteristic over every integer subinterval of the weight
/// window with length <= length_cap. A lower bound for the supremum over all
/// intervals of Z.
struct CharacteristicReport {
  double value = 0.0;
  IndexRange argmax;
  Index intervals = 0;
  Index length_cap = 0;
};

namespace detail {

template <class Ratio>
CharacteristicReport scan_intervals(Weight const& w, Index length_cap, std::vector<double> const& a,
                                    std::vector<double> const& b, Ratio ratio) {
  if (length_cap < 1) throw std::invalid_argument("characteristic: length cap must be >= 1");
  auto const n = w.size();
  std::vector<double> pa(n + 1, 0.0), pb(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i + 1] = pa[i] + a[i];
    pb[i + 1] = pb[i] + b[i];
  }
  CharacteristicReport rep;
  rep.length_cap = length_cap;
  rep.value = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t const last = std::min(n, s + static_cast<std::size_t>(length_cap));
    for (std::size_t e = s + 1; e <= last; ++e) {
      double const len = static_cast<double>(e - s);
      double const v = ratio((pa[e] - pa[s]) / len, (pb[e] - pb[s]) / len);
      ++rep.intervals;
      if (v > rep.value) {
        rep.value = v;
        rep.argmax = {w.lo() + static_cast<Index>(s), w.lo() + static_cast<Index>(e)};
      }
    }
  }
  return rep;
}

}  // namespace detail

/// [w]_{A_p} = sup_Q <w>_Q <w^(-1/(p-1))>_Q^(p-1).
inline CharacteristicReport ap_characteristic(Weight const& w, double p, Index length_cap = 1024) {
  if (!(p > 1.0)) throw std::invalid_argument("ap_characteristic: p must exceed 1");
  double const dual = -1.0 / (p - 1.0);
  std::vector<double> a(w.values()), b;
  for (double v : w.values()) b.push_back(v == 1.0 ? 1.0 : std::pow(v, dual));
  return detail::scan_intervals(w, length_cap, a, b,
                                [p](double ma, double mb) { return ma * (p == 2.0 ? mb : std::pow(mb, p - 1.0)); });
}

/// [w]_{RH_p} = sup_Q <w^p>_Q^(1/p) / <w>_Q.
inline CharacteristicReport rh_characteristic(Weight const& w, double p, Index length_cap = 1024) {
  if (!(p >= 1.0)) throw std::invalid_argument("rh_characteristic: p must be >= 1");
  std::vector<double> a, b(w.values());
  for (double v : w.values()) a.push_back(std::pow(v, p));
  return detail::scan_intervals(w, length_cap, a, b,
                                [p](double mp, double m1) { return (p == 1.0 ? mp : std::pow(mp, 1.0 / p)) / m1; });
}

/// sum_n |f(n)|^p w(n) over the weight window, to the power 1/p.
inline double weighted_norm(Signal const& f, Weight const& w, double p) {
  CompensatedSum s;
  for (Index n = w.lo(); n < w.hi(); ++n) s.add(std::pow(std::abs(f(n)), p) * w(n));
  return std::pow(s.value(), 1.0 / p);
}

/// Random test signal on [lo, hi) drawn from stream `trial`: profiles cycle
/// through complex Gaussian noise, a unimodular spike, and a constant block.
inline Signal random_test_signal(std::uint64_t seed, std::uint64_t trial, Index lo, Index hi) {
  if (hi <= lo) throw std::invalid_argument("random_test_signal: empty window");
  CounterRng rng(seed, trial);
  Signal f = Signal::zeros(lo, hi);
  switch (trial % 3) {
    case 0:
      for (auto& v : f.values()) {
        double const re = rng.normal();
        v = {re, rng.normal()};
      }
      break;
    case 1: {
      Index const at = rng.uniform_int(lo, hi - 1);
      f.at(at) = unit_exp(rng.uniform());
      break;
    }
    default: {
      Index const a = rng.uniform_int(lo, hi - 1);
      Index const b = rng.uniform_int(a, hi - 1);
      Complex const c = unit_exp(rng.uniform());
      for (Index n = a; n <= b; ++n) f.at(n) = c;
      break;
    }
  }
  return f;
}

/// Real standard Gaussian samples on [lo, hi) from stream `stream`.
inline Signal gaussian_signal(std::uint64_t seed, std::uint64_t stream, Index lo, Index hi) {
  if (hi <= lo) throw std::invalid_argument("gaussian_signal: empty window");
  CounterRng rng(seed, stream);
  Signal f = Signal::zeros(lo, hi);
  for (auto& v : f.values()) v = rng.normal();
  return f;
}

struct WeightedBoundReport {
  double p = 2.0;
  double r = 1.0;
  double ratio = 0.0;  // max over trials of ||Tf||_{p,w} / ||f||_{p,w}
  std::vector<double> ratios;
  CharacteristicReport ap;  // [w]_{A_{p/r}}
  CharacteristicReport rh;  // [w]_{RH_{r/(r - p(r-1))}}
};

/// Monte Carlo lower estimate of ||T : l^p(w) -> l^p(w)||. Test signals live on
/// the weight window and ||Tf|| is measured on the same window.
inline WeightedBoundReport weighted_bound_check(std::function<Signal(Signal const&)> const& op, Weight const& w,
                                                double p, double r, int trials, std::uint64_t seed,
                                                Index length_cap = 1024) {
  if (!(r >= 1.0 && r < 2.0)) throw std::invalid_argument("weighted_bound_check: r must lie in [1, 2)");
  double const r_dual = r == 1.0 ? std::numeric_limits<double>::infinity() : r / (r - 1.0);
  if (!(p > r && p < r_dual)) throw std::invalid_argument("weighted_bound_check: p must lie in (r, r')");
  if (trials < 1) throw std::invalid_argument("weighted_bound_check: trials must be >= 1");
  WeightedBoundReport rep;
  rep.p = p;
  rep.r = r;
  rep.ap = ap_characteristic(w, p / r, length_cap);
  rep.rh = rh_characteristic(w, r / (r - p * (r - 1.0)), length_cap);
  for (int t = 0; t < trials; ++t) {
    Signal const f = random_test_signal(seed, static_cast<std::uint64_t>(t), w.lo(), w.hi());
    double const den = weighted_norm(f, w, p);
    double const ratio = den > 0 ? weighted_norm(op(f), w, p) / den : 0.0;
    rep.ratios.push_back(ratio);
    rep.ratio = std::max(rep.ratio, ratio);
  }
  return rep;
}

}  // namespace carleson
