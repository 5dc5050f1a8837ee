#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "carleson/lambda_sets.hpp"
#include "carleson/rng.hpp"

using namespace carleson;

namespace {

// Minimal cover by brute force: try every subset size via interval DP over the
// sorted points (an interval of length < delta starting at a point).
Index brute_cover(std::vector<double> pts, double delta) {
  std::sort(pts.begin(), pts.end());
  std::size_t const n = pts.size();
  std::vector<Index> best(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    std::size_t j = i;
    while (j < n && pts[j] - pts[i] < delta) ++j;
    best[i] = 1 + best[j];
  }
  return n == 0 ? 0 : best[0];
}

}  // namespace

TEST(LambdaSet, SortsDedupsAndValidates) {
  LambdaSet const s({0.3, -0.1, 0.3, 0.5});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], -0.1);
  EXPECT_EQ(s[2], 0.5);
  EXPECT_DOUBLE_EQ(s.origin_gap(), 0.1);
  EXPECT_THROW(LambdaSet({0.6}), std::invalid_argument);
}

TEST(CoveringNumber, HandCases) {
  EXPECT_EQ(covering_number(LambdaSet({-0.4, 0.0, 0.4}), 0.5), 2);
  EXPECT_EQ(covering_number(LambdaSet({0.1, 0.2, 0.3}), 0.05), 3);
  EXPECT_EQ(covering_number(LambdaSet(), 0.1), 0);
  EXPECT_THROW(covering_number(LambdaSet({0.1}), 0.0), std::invalid_argument);
  EXPECT_THROW(covering_number(LambdaSet({0.1}), 1.5), std::invalid_argument);
}

TEST(CoveringNumber, MatchesBruteForceAndIsMonotone) {
  CounterRng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> pts;
    int const k = 1 + static_cast<int>(rng.uniform_int(0, 40));
    for (int i = 0; i < k; ++i) pts.push_back(rng.uniform() - 0.5);
    LambdaSet const s(pts);
    Index prev = std::numeric_limits<Index>::max();
    for (double d : dyadic_scales(0, 14)) {
      Index const n = covering_number(s, d);
      ASSERT_EQ(n, brute_cover(s.points(), d));
      ASSERT_LE(n, static_cast<Index>(s.size()));
      ASSERT_LE(prev == std::numeric_limits<Index>::max() ? 0 : prev, n);
      prev = n;
    }
  }
}

TEST(Constructors, Lacunary) {
  auto const s = make_lacunary(3, 0.5, 0.0);
  EXPECT_EQ(s.points(), (std::vector<double>{0.125, 0.25, 0.5}));
}

TEST(Constructors, CantorOneLevel) {
  auto const s = make_cantor(1, 1.0 / 3.0, 0.0, 0.5);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(s[2], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[3], 0.5);
}

TEST(Constructors, ArithmeticGrid) {
  auto const s = make_arithmetic_grid(4, 0.25);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s[0], 0.25);
  EXPECT_DOUBLE_EQ(s[3], 0.5);
  EXPECT_NEAR(s[1] - s[0], s[2] - s[1], 1e-15);
  EXPECT_DOUBLE_EQ(s.origin_gap(), 0.25);
}

TEST(Constructors, RejectBadParameters) {
  EXPECT_THROW(make_lacunary(0, 0.5), std::invalid_argument);
  EXPECT_THROW(make_lacunary(3, 1.5), std::invalid_argument);
  EXPECT_THROW(make_cantor(2, 0.5, 0, 0.5), std::invalid_argument);
  EXPECT_THROW(make_cantor(2, 0.3, 0, 0.7), std::invalid_argument);
  EXPECT_THROW(make_arithmetic_grid(3, 0.6), std::invalid_argument);
}

TEST(DimensionProfile, CantorScaling) {
  for (int level = 1; level <= 10; ++level) {
    auto const s = make_cantor(level, 1.0 / 3.0, -0.5, 0.5);
    EXPECT_EQ(covering_number(s, std::pow(1.0 / 3.0, level) * (1 + 1e-9)), Index{1} << level) << level;
  }
}

TEST(DimensionProfile, CantorFittedDimension) {
  auto const s = make_cantor(8, 1.0 / 3.0, -0.5, 0.5);
  std::vector<double> scales;
  for (int j = 1; j <= 8; ++j) scales.push_back(std::pow(1.0 / 3.0, j) * (1 + 1e-9));
  auto const rep = dimension_profile(s, scales);
  EXPECT_NEAR(rep.fitted_dimension, std::log(2.0) / std::log(3.0), 0.05);
}

TEST(DimensionProfile, FiniteSetFlattens) {
  auto const s = LambdaSet({-0.3, 0.1, 0.2, 0.45});
  auto const rep = dimension_profile(s, dyadic_scales(6, 20));
  EXPECT_EQ(rep.fitted_dimension, 0.0);
}

// The greedy count for {2^-j : j <= 12} at delta = 2^-i is max(i, 1); the fit
// over 2^0 .. 2^-12 is the least-squares slope of log(max(i,1)) on i log 2.
TEST(DimensionProfile, LacunaryMatchesExactCounts) {
  auto const s = make_lacunary(12, 0.5);
  auto const scales = dyadic_scales(0, 12);
  auto const rep = dimension_profile(s, scales, {0.0, 0.5, 1.0});
  std::vector<double> x, y;
  for (int i = 0; i <= 12; ++i) {
    EXPECT_EQ(rep.counts[static_cast<std::size_t>(i)], std::max(i, 1)) << i;
    x.push_back(i * std::log(2.0));
    y.push_back(std::log(static_cast<double>(std::max(i, 1))));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / 13;
    my += y[i] / 13;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  EXPECT_NEAR(rep.fitted_dimension, sxy / sxx, 1e-12);
  EXPECT_NEAR(rep.fitted_dimension, 0.3040, 5e-4);
  EXPECT_EQ(rep.c_d(0.0), 12.0);
  EXPECT_GE(rep.c_d(0.0), rep.c_d(0.5));
  EXPECT_GE(rep.c_d(0.5), rep.c_d(1.0));
  EXPECT_THROW((void)rep.c_d(0.7), std::out_of_range);
}

TEST(DimensionProfile, NeedsThreeScales) {
  EXPECT_THROW(dimension_profile(LambdaSet({0.1}), {0.5, 0.25}), std::invalid_argument);
}

TEST(DimensionProfile, CountsNonincreasingInDelta) {
  auto const s = make_cantor(6, 0.25, -0.5, 0.5);
  auto scales = dyadic_scales(0, 16);
  auto const rep = dimension_profile(s, scales);
  for (std::size_t i = 1; i < rep.counts.size(); ++i) EXPECT_GE(rep.counts[i], rep.counts[i - 1]);
}

TEST(Serialization, LambdaSetRoundTrip) {
  auto const s = make_cantor(3, 0.3, -0.4, 0.4);
  std::stringstream ss;
  write_lambda_set(ss, s);
  EXPECT_EQ(read_lambda_set(ss).points(), s.points());
}

TEST(Serialization, CoverReportTable) {
  auto const rep = dimension_profile(make_lacunary(4, 0.5), dyadic_scales(1, 3));
  std::ostringstream os;
  write_cover_report(os, rep);
  EXPECT_NE(os.str().find("delta,count\n0.5,1\n0.25,2\n0.125,3\n"), std::string::npos);
}
