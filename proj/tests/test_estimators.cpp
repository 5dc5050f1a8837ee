#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "carleson/estimators.hpp"
#include "carleson/lambda_sets.hpp"
#include "carleson/selector_process.hpp"

using namespace carleson;

namespace {

SelectorPath degenerate_path(Index n) {
  // sigma_m = X_m, so every Y_m vanishes.
  CounterRng rng(21);
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  std::vector<double> sigma(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = (i == 0 || rng.uniform() < 0.3) ? 1 : 0;
    sigma[i] = x[i];
  }
  return SelectorPath::from_selectors(SelectorParams(0.5, n, 0), x, sigma);
}

}  // namespace

TEST(OpNorm, IdentityAndShiftHaveNormOne) {
  auto id = [](Signal const& f) { return f; };
  auto shift = [](Signal const& f) {
    Signal g = Signal::zeros(f.lo() + 7, f.hi() + 7);
    for (Index n = f.lo(); n < f.hi(); ++n) g.at(n + 7) = f(n);
    return g;
  };
  for (double p : {1.0, 2.0, 3.5}) {
    for (auto const& est : {opnorm_estimate(id, p, -20, 20, 12, 4), opnorm_estimate(shift, p, -20, 20, 12, 4)}) {
      ASSERT_EQ(est.ratios.size(), 12u);
      for (double r : est.ratios) EXPECT_NEAR(r, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(opnorm_estimate(id, 2.0, 0, 4, 0, 1), std::invalid_argument);
}

TEST(OpNorm, MoreTrialsExtendFewer) {
  ModulatedKernelSpec spec;
  spec.truncation = 32;
  auto const k = build_kernel(spec);
  auto op = [&](Signal const& f) { return apply(k, 0.2, f); };
  auto const few = opnorm_estimate(op, 2.0, -32, 32, 5, 9);
  auto const many = opnorm_estimate(op, 2.0, -32, 32, 15, 9);
  for (std::size_t i = 0; i < few.ratios.size(); ++i) EXPECT_EQ(few.ratios[i], many.ratios[i]);
  EXPECT_GE(many.lower_bound, few.lower_bound);
}

TEST(SymbolNorm, HandKernels) {
  EXPECT_DOUBLE_EQ(certified_symbol_norm(Signal::delta(3), 256), 1.0);
  double const two_tap = certified_symbol_norm(Signal::from_real(0, {1, 1}), 1024);
  EXPECT_GE(two_tap, 2.0);
  EXPECT_LE(two_tap, 2.0 + 1e-4);
  // sup of the Carleson symbol is finite and independent of the grid up to padding.
  ModulatedKernelSpec spec;
  spec.truncation = 64;
  auto const ker = build_kernel(spec).kernel_at(0.0);
  double const coarse = certified_symbol_norm(ker, 1 << 12);
  double const fine = certified_symbol_norm(ker, 1 << 16);
  EXPECT_GE(coarse, fine * (1 - 1e-12));
  EXPECT_LT(coarse - fine, 1e-2);
}

TEST(BlockDecay, MonteCarloBelowCertifiedBounds) {
  auto const path = sample_path(SelectorParams(0.5, 4096, 3));
  auto const lambdas = make_lacunary(5, 0.5);
  BlockDecayOptions opts;
  opts.grid_exponent = 14;
  opts.trials = 6;
  opts.seed = 2;
  for (auto family : {BlockFamily::P, BlockFamily::Q}) {
    for (int k : {4, 7}) {
      auto const row = block_decay_row(path, lambdas, k, family, opts);
      EXPECT_GT(row.mc_single, 0.0);
      EXPECT_LE(row.mc_single, row.symbol_bound * (1 + 1e-12));
      EXPECT_LE(row.mc_maximal, row.union_bound * (1 + 1e-12));
      EXPECT_GE(row.mc_maximal, row.mc_single * (1 - 1e-12));
    }
  }
}

TEST(BlockDecay, DegenerateSelectorsFlagged) {
  auto const path = degenerate_path(1024);
  auto const fit = block_decay_fit(path, make_lacunary(3, 0.5), 3, 6, BlockFamily::P, {12, 0, 0, 64});
  EXPECT_TRUE(fit.degenerate);
  EXPECT_TRUE(std::isnan(fit.symbol_slope));
  EXPECT_THROW(block_decay_fit(path, make_lacunary(3, 0.5), 3, 4, BlockFamily::P), std::invalid_argument);
}

TEST(BlockDecay, PSymbolDecaysAndDerivativeGrows) {
  std::vector<SelectorPath> paths;
  for (std::uint64_t s = 0; s < 4; ++s) paths.push_back(sample_path(SelectorParams(0.5, 2048, 100 + s)));
  auto const fit = block_decay_fit_batch(paths, make_lacunary(4, 0.5), 4, 9, BlockFamily::P, {14, 0, 0, 64});
  ASSERT_FALSE(fit.degenerate);
  EXPECT_LT(fit.symbol_slope, 0.0);
  EXPECT_GT(fit.derivative_slope, 0.3);
  EXPECT_EQ(fit.ks.size(), 6u);
}

TEST(Sobolev, SinglePointAndZeroDimension) {
  auto const fam = smooth_modulated_family(8.0);
  std::vector<Signal> batch;
  for (std::uint64_t t = 0; t < 6; ++t) batch.push_back(random_test_signal(1, t, -64, 64));
  auto const rep = sobolev_check(fam, LambdaSet({0.1}), 0.0, dyadic_scales(1, 8), batch, 14);
  EXPECT_DOUBLE_EQ(rep.c_d, 1.0);
  EXPECT_NEAR(rep.bound_factor, 2 * rep.a, 1e-12);
  EXPECT_LE(rep.max_ratio, 0.5 + 1e-9);
  EXPECT_TRUE(rep.holds);
}

TEST(Sobolev, HomogeneousUnderAmplitude) {
  auto const lambdas = make_cantor(5, 1.0 / 3.0, 0.05, 0.45);
  double const d = std::log(2.0) / std::log(3.0);
  std::vector<Signal> batch;
  for (std::uint64_t t = 0; t < 4; ++t) batch.push_back(random_test_signal(2, t, -64, 64));
  auto const one = sobolev_check(smooth_modulated_family(8.0), lambdas, d, dyadic_scales(1, 8), batch, 14);
  auto const two = sobolev_check(smooth_modulated_family(8.0, 2.0), lambdas, d, dyadic_scales(1, 8), batch, 14);
  EXPECT_NEAR(two.a, 2 * one.a, 1e-12 * one.a);
  EXPECT_NEAR(two.A, 2 * one.A, 1e-12 * one.A);
  EXPECT_NEAR(two.bound_factor, 2 * one.bound_factor, 1e-12 * one.bound_factor);
  for (std::size_t i = 0; i < one.ratios.size(); ++i) EXPECT_NEAR(two.ratios[i], one.ratios[i], 1e-12);
}

TEST(Sobolev, RejectsNonTranslationFamilies) {
  auto const path = sample_path(SelectorParams(0.5, 256, 1));
  auto const q = q_k_kernel(path, 3);
  EXPECT_THROW(sobolev_check(q, LambdaSet({0.1}), 0.0, {0.5}, {}), std::invalid_argument);
  EXPECT_THROW(sobolev_check(smooth_modulated_family(4.0), LambdaSet({0.1}), 1.5, {0.5}, {}), std::invalid_argument);
}

TEST(SquareFunction, MatchesDirectSum) {
  for (double alpha : {0.3, 2.0 / 3.0}) {
    for (int k : {0, 3, 10}) {
      double w = 0, s = 0;
      for (Index m = 1; m <= (Index{1} << (k + 1)); ++m) {
        double const sig = std::pow(static_cast<double>(m), -alpha);
        w += sig;
        if (m >= (Index{1} << k)) s += sig / (w * w);
      }
      EXPECT_NEAR(square_function(alpha, k), std::sqrt(s), 1e-12 * std::sqrt(s));
    }
  }
  auto const rep = square_function_constant(0.5, 2, 12);
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    EXPECT_LE(rep.values[i], rep.constant * std::exp2(-rep.ks[i] * 0.25) * (1 + 1e-12));
  }
}

TEST(Tails, ZeroVarianceBlockNeverExceeds) {
  std::vector<SelectorPath> paths{degenerate_path(512), degenerate_path(512)};
  auto const ex = subgaussian_tail(paths, 5, 0.3, 0.25, {0.5, 1.0}, 1.0);
  for (double e : ex.exceedance) EXPECT_EQ(e, 0.0);
  for (double m : ex.moduli) EXPECT_EQ(m, 0.0);
  EXPECT_TRUE(std::isnan(ex.fitted_c));
}

TEST(Tails, ExceedanceMonotoneAndScaleFromSquareFunction) {
  std::vector<SelectorPath> paths;
  for (std::uint64_t s = 0; s < 200; ++s) paths.push_back(sample_path(SelectorParams(2.0 / 3.0, 1024, s)));
  auto const ex = subgaussian_tail(paths, 8, 0.3, 0.25, {3.0, 0.5, 1.0, 2.0});
  EXPECT_NEAR(ex.scale, square_function(2.0 / 3.0, 8), 1e-12);
  EXPECT_EQ(ex.threshold_grid.front(), 0.5);
  for (std::size_t i = 1; i < ex.exceedance.size(); ++i) EXPECT_LE(ex.exceedance[i], ex.exceedance[i - 1]);
  EXPECT_EQ(ex.moduli.size(), 200u);
}

TEST(Tails, MultiplierMatchesDefinition) {
  auto const path = sample_path(SelectorParams(0.5, 256, 5));
  Complex ref{};
  for (Index m = 16; m <= 32; ++m) {
    double const phase = 0.1 * static_cast<double>(m) + 0.4 * static_cast<double>(path.s(m - 1) + 1);
    ref += path.y(m) / path.w(m) * std::exp(Complex(0, 2 * std::numbers::pi * phase));
  }
  EXPECT_NEAR(std::abs(block_multiplier(path, 4, 0.1, 0.4) - ref), 0.0, 1e-13);
  EXPECT_THROW(block_multiplier(path, 8, 0.1, 0.4), std::invalid_argument);
}

TEST(Coefficients, MainTermConstant) {
  double w = 0, best = 0;
  for (Index m = 1; m <= 50; ++m) {
    w += std::pow(static_cast<double>(m), -0.5);
    double const md = static_cast<double>(m);
    best = std::max(best, md * md * std::abs(std::pow(md, -0.5) / w - 0.5 / md));
  }
  EXPECT_NEAR(main_term_coefficient_constant(0.5, 50), best, 1e-12 * best);
  EXPECT_LE(main_term_coefficient_constant(0.5, 50), main_term_coefficient_constant(0.5, 5000));
}

TEST(Coefficients, SelectorSumDecayFasterThanOneForSmallAlpha) {
  auto const path = sample_path(SelectorParams(0.2, Index{1} << 20, 1));
  EXPECT_GT(selector_sum_decay_exponent(path, 6), 1.0);
}
