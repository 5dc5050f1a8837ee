#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "carleson/core.hpp"
#include "carleson/rng.hpp"

using namespace carleson;

TEST(UnitExp, QuarterTurns) {
  EXPECT_NEAR(std::abs(unit_exp(0.25) - Complex(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(unit_exp(0.5) - Complex(-1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(unit_exp(7.0) - Complex(1, 0)), 0.0, 1e-15);
}

TEST(UnitExp, IntegerProductMatchesLongDoubleReduction) {
  double const lambda = 0.1234567891234;
  for (Index m : {Index{1}, Index{977}, Index{123456789}, Index{9876543210}}) {
    long double const prod = static_cast<long double>(lambda) * static_cast<long double>(m);
    long double const frac = prod - std::floor(prod);
    Complex const ref(std::cos(2 * std::numbers::pi * static_cast<double>(frac)),
                      std::sin(2 * std::numbers::pi * static_cast<double>(frac)));
    EXPECT_NEAR(std::abs(unit_exp(lambda, m) - ref), 0.0, 1e-9) << m;
  }
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

TEST(LeastSquares, ExactLine) {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  auto const f = least_squares(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
}

TEST(LeastSquares, DegenerateAbscissae) {
  std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_TRUE(std::isnan(least_squares(x, y).slope));
}

TEST(Format, RoundTrip) {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
  EXPECT_EQ(parse_index("+42"), 42);
  EXPECT_THROW(parse_index("4.2"), std::invalid_argument);
}

TEST(CounterRng, ReproducibleAndStreamSeparated) {
  CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.word_at(i), b.word_at(i));
    EXPECT_NE(a.word_at(i), c.word_at(i));
    EXPECT_NE(a.word_at(i), d.word_at(i));
  }
}

TEST(CounterRng, UniformMoments) {
  CounterRng r(7);
  double s = 0, s2 = 0;
  int const n = 200000;
  for (int i = 0; i < n; ++i) {
    double const u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - 0.25, 1.0 / 12.0 - 0.0, 0.005);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(9);
  double s = 0, s2 = 0;
  int const n = 200000;
  for (int i = 0; i < n; ++i) {
    double const z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(CounterRng, UniformIntCoversRangeInclusive) {
  CounterRng r(1);
  std::set<Index> seen;
  for (int i = 0; i < 2000; ++i) {
    Index const v = r.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}
