#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "carleson/lambda_sets.hpp"
#include "carleson/operators.hpp"
#include "carleson/rng.hpp"
#include "carleson/selector_process.hpp"

using namespace carleson;

namespace {

Signal random_signal(std::uint64_t seed, Index lo, Index hi) {
  CounterRng rng(seed, 3);
  Signal f = Signal::zeros(lo, hi);
  for (auto& v : f.values()) {
    double const re = rng.normal();
    v = {re, rng.normal()};
  }
  return f;
}

SelectorPath constant_path(Index n, std::uint8_t x, double sigma, double alpha = 0.5) {
  return SelectorPath::from_selectors(SelectorParams(alpha, n, 0), std::vector<std::uint8_t>(n, x),
                                      std::vector<double>(n, sigma));
}

// Straight from the definitions, no tap lists.
Signal naive_t_full(SelectorPath const& path, double lambda, Signal const& f, Index M) {
  Signal out = Signal::zeros(f.lo() - M, f.hi() + M);
  for (Index x = out.lo(); x < out.hi(); ++x) {
    Complex acc{};
    for (Index m = -M; m <= M; ++m) {
      if (m == 0 || path.x(std::abs(m)) == 0) continue;
      acc += std::exp(Complex(0, 2 * std::numbers::pi * lambda * static_cast<double>(m))) /
             static_cast<double>(path.s(m)) * f(x - m);
    }
    out.at(x) = acc;
  }
  return out;
}

Signal naive_c_full(SelectorPath const& path, double lambda, Signal const& f, Index M) {
  Index const reach = path.s(M);
  Signal out = Signal::zeros(f.lo() - reach, f.hi() + reach);
  for (Index x = out.lo(); x < out.hi(); ++x) {
    Complex acc{};
    for (Index m = 1; m <= M; ++m) {
      if (path.x(m) == 0) continue;
      Index const s = path.s(m);
      acc += std::exp(Complex(0, 2 * std::numbers::pi * lambda * static_cast<double>(m))) / static_cast<double>(s) *
             (f(x - s) - f(x + s));
    }
    out.at(x) = acc;
  }
  return out;
}

Signal sum_of(std::vector<Signal> const& parts) {
  Signal acc;
  for (auto const& p : parts) acc = acc + p;
  return acc;
}

}  // namespace

TEST(Kernel, CarlesonOnDelta) {
  ModulatedKernelSpec spec;
  spec.truncation = 50;
  auto const k = build_kernel(spec);
  EXPECT_EQ(k.taps().size(), 100u);
  double const lambda = 0.137;
  auto const out = apply(k, lambda, Signal::delta(0));
  for (Index m = -50; m <= 50; ++m) {
    Complex const expect = m == 0 ? Complex{} : unit_exp(lambda, m) / static_cast<double>(m);
    EXPECT_NEAR(std::abs(out(m) - expect), 0.0, 1e-15) << m;
  }
  EXPECT_TRUE(k.translation_modulated());
}

TEST(Kernel, CarlesonIsOdd) {
  ModulatedKernelSpec spec;
  spec.truncation = 20;
  auto const k = build_kernel(spec).kernel_at(0.0);
  for (Index d = 1; d <= 20; ++d) EXPECT_DOUBLE_EQ(k(d).real(), -k(-d).real());
  EXPECT_EQ(k(0), Complex{});
}

TEST(Kernel, PathKindsRequirePath) {
  ModulatedKernelSpec spec;
  spec.kind = KernelKind::t_full;
  EXPECT_THROW(build_kernel(spec), std::invalid_argument);
  auto const path = sample_path(SelectorParams(0.5, 100, 1));
  spec.path = &path;
  spec.truncation = 101;
  EXPECT_THROW(build_kernel(spec), std::invalid_argument);
}

TEST(Kernel, AllSelectedPathReducesToCarleson) {
  auto const path = constant_path(256, 1, 1.0);
  ModulatedKernelSpec full{KernelKind::t_full, 0.5, &path, std::nullopt, 256};
  ModulatedKernelSpec plain{KernelKind::carleson, 0.5, nullptr, std::nullopt, 256};
  Signal const f = random_signal(1, -10, 30);
  for (double lambda : {0.0, 0.21, -0.4}) {
    EXPECT_LT(max_abs_difference(eval_single_lambda(full, lambda, f), eval_single_lambda(plain, lambda, f)), 1e-14);
  }
}

TEST(Kernel, MatchesNaiveEvaluator) {
  auto const path = sample_path(SelectorParams(0.5, 4096, 11));
  Signal const f = random_signal(2, 0, 64);
  for (double lambda : {0.0, 0.1, -0.33, 0.5}) {
    ModulatedKernelSpec t{KernelKind::t_full, 0.5, &path, std::nullopt, 4096};
    EXPECT_LT(max_abs_difference(eval_single_lambda(t, lambda, f), naive_t_full(path, lambda, f, 4096)), 1e-10);
    ModulatedKernelSpec c{KernelKind::c_full, 0.5, &path, std::nullopt, 4096};
    EXPECT_LT(max_abs_difference(eval_single_lambda(c, lambda, f), naive_c_full(path, lambda, f, 4096)), 1e-10);
  }
}

TEST(Kernel, DirectAndSpectralAgree) {
  auto const path = sample_path(SelectorParams(2.0 / 3.0, 2048, 5));
  Signal const f = random_signal(3, -40, 200);
  for (auto kind : {KernelKind::carleson, KernelKind::term_R0, KernelKind::t_full, KernelKind::term_R1,
                    KernelKind::term_R2, KernelKind::term_R3, KernelKind::c_full, KernelKind::term_C1,
                    KernelKind::term_C2, KernelKind::term_C3, KernelKind::term_C4}) {
    ModulatedKernelSpec spec{kind, 2.0 / 3.0, &path, std::nullopt, 2048};
    auto const k = build_kernel(spec);
    for (double lambda : {0.05, -0.27}) {
      auto const a = apply(k, lambda, f, EvalMethod::direct);
      auto const b = apply(k, lambda, f, EvalMethod::spectral);
      EXPECT_EQ(a.lo(), b.lo());
      EXPECT_LT(max_abs_difference(a, b), 1e-9 * std::max(1.0, a.norm(INFINITY))) << to_string(kind);
    }
  }
}

TEST(Decomposition, TranslationFamilySumsToFull) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto const path = sample_path(SelectorParams(0.4, 3000, seed));
    Signal const f = random_signal(seed, -20, 50);
    auto eval = [&](KernelKind kind, double lambda) {
      return eval_single_lambda({kind, 0.4, &path, std::nullopt, 3000}, lambda, f, EvalMethod::direct);
    };
    for (double lambda : {0.0, 0.3}) {
      auto const parts = sum_of({eval(KernelKind::term_R0, lambda), eval(KernelKind::term_R1, lambda),
                                 eval(KernelKind::term_R2, lambda), eval(KernelKind::term_R3, lambda)});
      EXPECT_LT(max_abs_difference(parts, eval(KernelKind::t_full, lambda)), 1e-12);
    }
  }
}

TEST(Decomposition, SelectorShiftFamilySumsToFull) {
  for (std::uint64_t seed : {4u, 5u}) {
    auto const path = sample_path(SelectorParams(0.6, 3000, seed));
    Signal const f = random_signal(seed, 0, 40);
    auto eval = [&](KernelKind kind, double lambda) {
      return eval_single_lambda({kind, 0.6, &path, std::nullopt, 3000}, lambda, f, EvalMethod::direct);
    };
    for (double lambda : {0.0, -0.45}) {
      auto const parts = sum_of({eval(KernelKind::term_C1, lambda), eval(KernelKind::term_C2, lambda),
                                 eval(KernelKind::term_C3, lambda), eval(KernelKind::term_C4, lambda)});
      EXPECT_LT(max_abs_difference(parts, eval(KernelKind::c_full, lambda)), 1e-12);
    }
  }
}

TEST(Decomposition, SelectorShiftKindsAreAntisymmetric) {
  auto const path = sample_path(SelectorParams(0.5, 500, 9));
  for (auto kind : {KernelKind::c_full, KernelKind::term_C1, KernelKind::term_C3}) {
    auto const k = build_kernel({kind, 0.5, &path, std::nullopt, 500}).kernel_at(0.17);
    for (Index d = 1; d < k.hi(); ++d) EXPECT_NEAR(std::abs(k(d) + k(-d)), 0.0, 1e-14);
  }
}

TEST(Maximal, SingletonIsModulus) {
  ModulatedKernelSpec spec;
  spec.truncation = 128;
  Signal const f = random_signal(6, 0, 30);
  auto const m = eval_maximal(spec, LambdaSet({0.2}), f);
  EXPECT_LT(max_abs_difference(m.values, eval_single_lambda(spec, 0.2, f).modulus()), 1e-15);
  for (double a : m.argmax) EXPECT_EQ(a, 0.2);
}

TEST(Maximal, MonotoneInLambdaSet) {
  auto const path = sample_path(SelectorParams(0.5, 1024, 2));
  auto const k = build_kernel({KernelKind::t_full, 0.5, &path, std::nullopt, 1024});
  Signal const f = random_signal(7, 0, 50);
  auto const small = maximal(k, make_lacunary(4, 0.5), f);
  auto const large = maximal(k, make_lacunary(10, 0.5), f);
  for (Index x = small.values.lo(); x < small.values.hi(); ++x) {
    EXPECT_LE(small.values(x).real(), large.values(x).real() + 1e-15);
  }
  EXPECT_THROW(maximal(k, LambdaSet{}, f), std::invalid_argument);
}

TEST(Maximal, L1Contraction) {
  auto const path = sample_path(SelectorParams(0.3, 2048, 3));
  auto const k = build_kernel({KernelKind::c_full, 0.3, &path, std::nullopt, 2048});
  Signal const f = random_signal(8, -5, 25);
  auto const out = apply(k, 0.11, f);
  EXPECT_LE(out.norm(1), k.l1_mass() * f.norm(1) * (1 + 1e-12));
}

TEST(HardyLittlewood, DeltaProfile) {
  auto const m = hardy_littlewood_max(Signal::delta(0), -20, 21);
  for (Index x = -20; x <= 20; ++x) EXPECT_DOUBLE_EQ(m(x).real(), 1.0 / static_cast<double>(std::abs(x) + 1));
}

TEST(HardyLittlewood, ConstantAndDomination) {
  Signal const c = Signal::from_real(0, std::vector<double>(40, 2.5));
  auto const mc = hardy_littlewood_max(c);
  for (Index x = 0; x < 40; ++x) EXPECT_DOUBLE_EQ(mc(x).real(), 2.5);
  Signal const f = random_signal(9, -8, 8);
  auto const mf = hardy_littlewood_max(f, -12, 12);
  for (Index x = -12; x < 12; ++x) {
    EXPECT_GE(mf(x).real(), std::abs(f(x)) * (1 - 1e-14));
    // Brute force over all intervals inside [-30, 30] that contain x.
    double best = 0;
    for (Index a = -30; a <= x; ++a) {
      for (Index b = x; b <= 30; ++b) {
        double s = 0;
        for (Index n = a; n <= b; ++n) s += std::abs(f(n));
        best = std::max(best, s / static_cast<double>(b - a + 1));
      }
    }
    EXPECT_NEAR(mf(x).real(), best, 1e-12);
  }
}

TEST(Blocks, PkSupportAndDegenerateSelectors) {
  auto const path = sample_path(SelectorParams(0.5, 1024, 4));
  auto const k = p_k_kernel(path, 5);
  for (auto const& t : k.taps()) {
    EXPECT_GE(std::abs(t.modulation), 32);
    EXPECT_LT(std::abs(t.modulation), 64);
  }
  EXPECT_THROW(p_k_kernel(path, 10), std::invalid_argument);
  // sigma = X makes Y vanish, so P_k is the zero operator.
  CounterRng rng(3);
  std::vector<std::uint8_t> x(256);
  std::vector<double> sigma(256);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform() < 0.5 ? 1 : 0;
    sigma[i] = x[i];
  }
  x[0] = 1;
  sigma[0] = 1;
  auto const degenerate = SelectorPath::from_selectors(SelectorParams(0.5, 256, 0), x, sigma);
  EXPECT_TRUE(p_k_kernel(degenerate, 4).empty());
  EXPECT_EQ(block_P_k(degenerate, make_lacunary(3, 0.5), 4, Signal::delta(0)).norm(INFINITY), 0.0);
}

TEST(Blocks, QkUsesInclusiveBlock) {
  auto const path = constant_path(256, 1, 0.5);
  auto const k = q_k_kernel(path, 3);
  Index lo = 1000, hi = 0;
  for (auto const& t : k.taps()) {
    lo = std::min(lo, t.modulation);
    hi = std::max(hi, t.modulation);
  }
  EXPECT_EQ(lo, 8);
  EXPECT_EQ(hi, 16);
}

TEST(Blocks, PkOnDeltaAtSingleLambda) {
  auto const path = sample_path(SelectorParams(0.5, 1024, 6));
  double const lambda = 0.31;
  auto const out = block_P_k(path, LambdaSet({lambda}), 6, Signal::delta(0));
  for (Index m = 64; m < 128; ++m) {
    EXPECT_NEAR(out(m).real(), std::abs(path.y(m) / path.w(m)), 1e-15);
    EXPECT_NEAR(out(-m).real(), std::abs(path.y(m) / path.w(m)), 1e-15);
  }
}

TEST(Aj, AllSelectedPathGivesSingleTerms) {
  auto const path = constant_path(100, 1, 1.0);
  auto const times = hitting_times(path);
  auto const aj = aj_coefficients(times, 0.2, 50);
  for (Index j = 1; j <= 50; ++j) {
    EXPECT_NEAR(std::abs(aj.coeffs[j] - unit_exp(0.2, j) / static_cast<double>(j)), 0.0, 1e-15);
    EXPECT_EQ(aj.first_m[j], j);
    EXPECT_EQ(aj.last_m[j], j);
  }
}

TEST(Aj, RegroupedIdentityIsExact) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto const path = sample_path(SelectorParams(2.0 / 3.0, 5000, seed));
    Signal const f = random_signal(seed + 10, -10, 30);
    for (double lambda : {0.0, 0.1, 0.45}) {
      auto const rep = aj_identity_check(path, lambda, f, 5000);
      EXPECT_LT(rep.residual, 1e-12);
      EXPECT_EQ(rep.blocks, path.s(5000));
      EXPECT_LE(rep.matched_m, 5000);
      EXPECT_GE(rep.unmatched_tail, 0.0);
    }
  }
}

TEST(Aj, BlockConventionsPartitionPositiveIntegers) {
  auto const sk = skeleton(2.0 / 3.0, 30);
  for (auto conv : {BlockConvention::regrouped, BlockConvention::as_stated}) {
    auto const aj = aj_coefficients(sk, 0.0, 30, conv);
    Index next = 1;
    for (Index j = 1; j <= 30; ++j) {
      if (aj.first_m[j] > aj.last_m[j]) continue;
      EXPECT_EQ(aj.first_m[j], next) << j;
      next = aj.last_m[j] + 1;
    }
  }
}

TEST(Aj, SkeletonApproximationRowsAreConsistent) {
  auto const sk = skeleton(2.0 / 3.0, 60);
  auto const rep = aj_skeleton_approximation(sk, 0.3, 1, 60);
  EXPECT_FALSE(rep.rows.empty());
  for (auto const& row : rep.rows) {
    Complex direct{};
    for (Index m = sk.p[row.j - 1]; m < sk.p[row.j]; ++m) direct += unit_exp(0.3, m) / static_cast<double>(m);
    EXPECT_NEAR(std::abs(direct - row.coefficient), 0.0, 1e-12);
    EXPECT_LE(row.scaled_error, rep.constant);
  }
  EXPECT_THROW(aj_skeleton_approximation(sk, 0.3, 0, 10), std::invalid_argument);
}

TEST(Lemma43, DeltaClosedForm) {
  auto const sk = skeleton(2.0 / 3.0, 300);
  double const eps = 1.0 / 16;
  auto const rep = lemma43_bound_check(sk, eps, Signal::delta(0), 64);
  EXPECT_EQ(rep.j_limit, 255);
  for (Index x = -300; x <= 300; ++x) {
    Index const a = std::abs(x);
    double const expect = (a >= 2 && a <= rep.j_limit) ? 1.0 / static_cast<double>(a) : 0.0;
    EXPECT_NEAR(rep.lhs(x).real(), expect, 1e-15) << x;
  }
  EXPECT_NEAR(rep.constant, 1.5 / std::log(16.0), 1e-12);
}

TEST(Lemma43, BelowCrudeHarmonicBound) {
  auto const sk = skeleton(2.0 / 3.0, 100);
  Signal const f = random_signal(12, 0, 64);
  auto const rep = lemma43_bound_check(sk, 0.125, f, 32);
  for (Index x = rep.lhs.lo(); x < rep.lhs.hi(); ++x) {
    double crude = 0;
    for (Index j = 2; j <= rep.j_limit; ++j) crude += (std::abs(f(x + j)) + std::abs(f(x - j))) / static_cast<double>(j);
    EXPECT_LE(rep.lhs(x).real(), crude + 1e-12);
  }
  EXPECT_GT(rep.constant, 0.0);
  EXPECT_THROW(lemma43_bound_check(sk, 0.3, f), std::invalid_argument);
}
