#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ewpitman/numerics.hpp"

using namespace ewpitman;

namespace {

// Plain loop product, independent of the log-space code under test.
double direct_rising(double a, int n) {
  double p = 1.0;
  for (int k = 0; k < n; ++k) p *= a + k;
  return p;
}

}  // namespace

TEST(RisingFactorial, SmallValues) {
  EXPECT_NEAR(rising_factorial(0.5, 3).value(), 0.5 * 1.5 * 2.5, 1e-15);
  EXPECT_DOUBLE_EQ(rising_factorial(0.5, 3).value(), 1.875);
  EXPECT_DOUBLE_EQ(rising_factorial(7.3, 0).value(), 1.0);
  EXPECT_DOUBLE_EQ(rising_factorial(-0.5, 2).value(), -0.25);
}

TEST(RisingFactorial, HitsZeroAtNonPositiveInteger) {
  EXPECT_TRUE(rising_factorial(-3.0, 4).is_zero());
  EXPECT_TRUE(rising_factorial(0.0, 1).is_zero());
  EXPECT_FALSE(rising_factorial(-3.0, 3).is_zero());
  EXPECT_DOUBLE_EQ(rising_factorial(-3.0, 3).value(), -6.0);
}

TEST(RisingFactorial, SignAlternatesForNegativeBase) {
  // (-alpha)^{(n)} has sign (-1)^1 times positive factors for alpha in (0,1).
  for (int n = 1; n < 10; ++n) EXPECT_EQ(rising_factorial(-0.3, n).sign(), -1) << n;
  EXPECT_EQ(rising_factorial(-1.5, 2).sign(), 1);  // (-1.5)(-0.5)
}

TEST(RisingFactorial, MatchesDirectProduct) {
  for (double a : {0.1, 0.5, 1.0, 2.75, 13.0, -0.4, -2.5})
    for (int n = 0; n <= 40; ++n) {
      const double expect = direct_rising(a, n);
      EXPECT_NEAR(rising_factorial(a, n).value(), expect, 1e-13 * std::fabs(expect)) << a << " " << n;
    }
}

TEST(RisingFactorial, LargeArgumentsStayFinite) {
  // (1)^{(n)} = n!; compare logs where the value overflows double.
  const LogScalar big = rising_factorial(1.0, 100000);
  EXPECT_NEAR(big.log_abs(), std::lgamma(100001.0), 1e-9 * std::lgamma(100001.0));
  EXPECT_EQ(big.sign(), 1);
}

TEST(RisingFactorial, ProductRule) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ua(-3.0, 5.0);
  std::uniform_int_distribution<int> un(0, 30);
  for (int t = 0; t < 500; ++t) {
    const double a = ua(gen);
    const int n = un(gen);
    const int m = un(gen);
    const LogScalar lhs = rising_factorial(a, n) * rising_factorial(a + n, m);
    const LogScalar rhs = rising_factorial(a, n + m);
    ASSERT_EQ(lhs.sign(), rhs.sign()) << a << " " << n << " " << m;
    if (!rhs.is_zero()) {
      EXPECT_NEAR(lhs.log_abs(), rhs.log_abs(), 1e-12 * (1.0 + std::fabs(rhs.log_abs())));
    }
  }
}

TEST(FallingFactorial, Examples) {
  EXPECT_DOUBLE_EQ(falling_factorial(3.0, 2).value(), 6.0);
  EXPECT_DOUBLE_EQ(falling_factorial(4.2, 0).value(), 1.0);
  EXPECT_TRUE(falling_factorial(2.0, 3).is_zero());
  EXPECT_NEAR(falling_factorial(0.5, 3).value(), 0.5 * -0.5 * -1.5, 1e-15);
}

TEST(LogScalar, Arithmetic) {
  const auto a = LogScalar::from_value(-3.0);
  const auto b = LogScalar::from_value(0.5);
  EXPECT_DOUBLE_EQ((a * b).value(), -1.5);
  EXPECT_DOUBLE_EQ((a / b).value(), -6.0);
  EXPECT_DOUBLE_EQ(a.pow(3).value(), -27.0);
  EXPECT_TRUE((a * LogScalar::zero()).is_zero());
  EXPECT_THROW(a / LogScalar::zero(), std::domain_error);
  EXPECT_EQ(LogScalar::from_value(0.0).sign(), 0);
}

TEST(Stirling2, Examples) {
  EXPECT_EQ(stirling2(2, 1), 1);
  EXPECT_EQ(stirling2(3, 2), 3);
  for (int p = 0; p <= 12; ++p) EXPECT_EQ(stirling2(p, p), 1);
  EXPECT_EQ(stirling2(0, 0), 1);
  EXPECT_EQ(stirling2(5, 0), 0);
  EXPECT_EQ(stirling2(10, 3), 9330);
  EXPECT_THROW(stirling2(2, 3), std::domain_error);
}

TEST(Stirling2, RecurrenceMatchesExplicitFormula) {
  for (int p = 0; p <= 15; ++p)
    for (int i = 0; i <= p; ++i) EXPECT_EQ(stirling2(p, i), stirling2_explicit(p, i)) << p << "," << i;
}

TEST(Stirling2, RowSumsAreBellNumbers) {
  const long bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
  for (int p = 0; p <= 10; ++p) {
    Rational s(0);
    for (int i = 0; i <= p; ++i) s += stirling2(p, i);
    EXPECT_EQ(s, bell[p]) << p;
  }
}

TEST(Gfc, Examples) {
  EXPECT_EQ(gfc<Rational>(1, 1, Rational(1, 2)), Rational(1, 2));
  EXPECT_EQ(gfc<Rational>(2, 2, Rational(1, 2)), Rational(1, 4));
  EXPECT_EQ(gfc<Rational>(2, 1, Rational(1, 2)), Rational(1, 4));
  EXPECT_EQ(gfc<Rational>(0, 0, Rational(1, 3)), 1);
  EXPECT_EQ(gfc<Rational>(4, 0, Rational(1, 3)), 0);
  EXPECT_DOUBLE_EQ(gfc<double>(1, 1, 0.3), 0.3);
  EXPECT_THROW(gfc<Rational>(2, 3, Rational(1, 2)), std::domain_error);
  EXPECT_THROW(gfc_alternating<Rational>(2, 3, Rational(1, 2)), std::domain_error);
}

TEST(Gfc, RecurrenceEqualsAlternatingSumExactly) {
  for (const Rational& alpha : {Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(3, 4)}) {
    const GfcTriangle<Rational> tri(20, alpha);
    for (int n = 0; n <= 20; ++n)
      for (int k = 0; k <= n; ++k) ASSERT_EQ(tri.at(n, k), gfc_alternating<Rational>(n, k, alpha)) << n << "," << k;
  }
}

TEST(Gfc, DiagonalIsAlphaPower) {
  // C(n,n;alpha) = alpha^n: only the all-singleton path contributes.
  const Rational alpha(2, 7);
  const GfcTriangle<Rational> tri(12, alpha);
  for (int n = 0; n <= 12; ++n) EXPECT_EQ(tri.at(n, n), int_power<Rational>(alpha, n));
}

TEST(GfcLog, AgreesWithExactTriangle) {
  const Rational alpha(1, 3);
  const GfcTriangle<Rational> exact(60, alpha);
  const GfcLogTriangle logt(60, 1.0 / 3.0);
  for (int n = 1; n <= 60; ++n)
    for (int k = 1; k <= n; ++k) {
      const double want = std::log(to_double(exact.at(n, k)));
      EXPECT_NEAR(logt.log_at(n, k), want, 1e-12 * std::max(1.0, std::fabs(want))) << n << "," << k;
    }
  EXPECT_EQ(logt.log_at(5, 0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(logt.log_at(5, 6), -std::numeric_limits<double>::infinity());
}

TEST(GfcLog, LargeNStaysFinite) {
  const GfcLogTriangle t(3000, 0.5);
  for (int k = 1; k <= 3000; k += 97) EXPECT_TRUE(std::isfinite(t.log_at(3000, k)));
  EXPECT_THROW(GfcLogTriangle(10, 0.0), std::domain_error);
  EXPECT_THROW(t.log_at(3001, 1), std::out_of_range);
}

TEST(ChuVandermonde, Examples) {
  EXPECT_TRUE(chu_vandermonde_check(0, 1.7, 0.3));
  EXPECT_TRUE(chu_vandermonde_check(3, 2.5, 0.5));
  EXPECT_TRUE(chu_vandermonde_check(5, 1.3, -0.7));
  EXPECT_THROW(chu_vandermonde_check(3, 0.0, 0.5), std::domain_error);
  EXPECT_THROW(chu_vandermonde_check(3, -2.0, 0.5), std::domain_error);
}

TEST(ChuVandermonde, Grid) {
  for (int n = 0; n <= 40; ++n)
    for (double a : {0.25, 0.5, 1.3, 2.5, 7.0, -0.5, -1.75})
      for (double b : {-2.3, -0.7, 0.1, 0.5, 1.0, 3.3}) EXPECT_TRUE(chu_vandermonde_check(n, a, b)) << n << " " << a << " " << b;
}

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-1/8"), Rational(-1, 8));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("2"), Rational(2));
  EXPECT_EQ(parse_rational("1.5e-1"), Rational(3, 20));
  EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
}

TEST(ParseRational, LeadingZerosAreDecimal) {
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("010"), Rational(10));
  EXPECT_EQ(parse_rational("08/016"), Rational(1, 2));
  EXPECT_EQ(parse_rational("0"), Rational(0));
}

TEST(RisingRatio, AgreesWithQuotientAndStaysAccurate) {
  for (double a : {0.3, 2.5, -1.4, -0.6})
    for (double b : {0.7, 1.0, -2.2, 4.5})
      for (int n = 0; n <= 30; ++n) {
        const LogScalar q = rising_factorial(a, n) / rising_factorial(b, n);
        const LogScalar rr = rising_ratio(a, b, n);
        ASSERT_EQ(q.sign(), rr.sign()) << a << " " << b << " " << n;
        if (!q.is_zero()) {
          EXPECT_NEAR(rr.log_abs(), q.log_abs(), 1e-12) << a << " " << b << " " << n;
        }
      }
  // Consecutive orders differ by exactly one factor, even far out.
  for (std::int64_t n : {1000, 123456, 10000000}) {
    const double step = (rising_ratio(1.5, 0.8, n + 1) / rising_ratio(1.5, 0.8, n)).value();
    EXPECT_NEAR(step, (1.5 + n) / (0.8 + n), 1e-14) << n;
  }
  EXPECT_TRUE(rising_ratio(-2.0, 0.5, 3).is_zero());
  EXPECT_THROW(rising_ratio(0.5, -1.0, 2), std::domain_error);
}
