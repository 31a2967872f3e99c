#include <gtest/gtest.h>

#include <random>

#include "k3arith/padic.hpp"
#include "k3arith/series.hpp"
#include "k3arith/witt.hpp"

using namespace k3arith;

TEST(Valuation, Examples) {
  EXPECT_EQ(val_p(PadicInt(5, 6, std::int64_t{50})), (Valuation{2, true}));
  EXPECT_EQ(val_p(PadicInt(5, 6, std::int64_t{0})).str(), ">= 6");
  EXPECT_EQ(val_p(PadicInt(2, 10, std::int64_t{768})), (Valuation{8, true}));
}

TEST(Witt, FrobeniusOrderTwo) {
  WittRing r(3, 2, 8);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    auto w = r.from_coefficients({Integer(static_cast<long>(rng() % 6561)),
                                  Integer(static_cast<long>(rng() % 6561))});
    EXPECT_EQ(r.frobenius(r.frobenius(w)), w);
  }
}

TEST(Series, ReverseQuadratic) {
  RationalField q;
  PowerSeries<RationalField> f(q, {Rational(0), Rational(1), Rational(1), Rational(0)});
  auto g = series_reverse(f, 4);
  EXPECT_EQ(g, PowerSeries<RationalField>(q, {Rational(0), Rational(1), Rational(-1), Rational(2)}));
}
