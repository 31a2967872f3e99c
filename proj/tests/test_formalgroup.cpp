#include <gtest/gtest.h>

#include <random>

#include "k3arith/formalgroup.hpp"

using namespace k3arith;

namespace {

RationalSeries rational_series(std::vector<Rational> c) {
  return RationalSeries(RationalField{}, std::move(c));
}

// exp(log x + log y) expanded directly through bivariate powers.
BivariateSeries<RationalField> law_by_expansion(const RationalSeries& ell, std::size_t n) {
  const RationalField q;
  const auto e = series_reverse(ell, n);
  BivariateSeries<RationalField> s(q, n);
  for (std::size_t i = 1; i < n; ++i) {
    s.at(i, 0) = ell[i];
    s.at(0, i) = ell[i];
  }
  BivariateSeries<RationalField> acc(q, n);
  BivariateSeries<RationalField> pw(q, n);
  pw.at(0, 0) = 1;
  for (std::size_t k = 1; k < n; ++k) {
    pw = pw * s;
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t j = 0; j <= d; ++j)
        acc.at(d - j, j) += e[k] * pw.at(d - j, j);
  }
  return acc;
}

}  // namespace

TEST(HondaLog, Examples) {
  EXPECT_EQ(honda_log(1, 2, 5),
            rational_series({0, 1, Rational(1, 2), 0, Rational(1, 4)}));
  EXPECT_EQ(honda_log(2, 2, 5), rational_series({0, 1, 0, 0, Rational(1, 2)}));
  const auto l = honda_log(3, 3, 28);
  for (std::size_t i = 0; i < 28; ++i) {
    const Rational want = i == 1 ? Rational(1) : i == 27 ? Rational(1, 3) : Rational(0);
    EXPECT_EQ(l[i], want) << i;
  }
}

TEST(LawFromLog, MatchesDirectExpansion) {
  for (const auto& ell : {multiplicative_log(9), honda_log(1, 2, 9), honda_log(2, 2, 9),
                          honda_log(1, 3, 9)}) {
    EXPECT_EQ(detail::law_over_q(ell, 9), law_by_expansion(ell, 9));
  }
}

TEST(LawFromLog, AdditiveAndMultiplicative) {
  ResidueRing r(5, 4);
  const auto ga = additive_law(r, 12);
  const auto gm = multiplicative_law(r, 12);
  for (std::size_t d = 0; d < 12; ++d)
    for (std::size_t j = 0; j <= d; ++j) {
      const std::size_t i = d - j;
      EXPECT_EQ(ga.coefficient(i, j), (d == 1) ? 1u : 0u);
      const bool xy = (i == 1 && j == 1) || d == 1;
      EXPECT_EQ(gm.coefficient(i, j), xy ? 1u : 0u);
    }
}

TEST(LawFromLog, NonIntegralLogRejected) {
  ResidueRing r(2, 6);
  const auto ell = rational_series({0, 1, Rational(1, 4), 0, 0, 0});
  try {
    fgl_from_log(ell, r, 6);
    FAIL() << "expected a precondition error";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("log does not define an integral group law"),
              std::string::npos);
  }
}

TEST(LawFromLog, ConstructionChecksAxioms) {
  ResidueRing r(3, 3);
  BivariateSeries<ResidueRing> f(r, 6);
  f.at(1, 0) = 1;
  f.at(0, 1) = 1;
  f.at(2, 1) = 1;
  f.at(1, 2) = 1;
  EXPECT_THROW(FormalGroupLaw<ResidueRing>{f}, PreconditionError);
  f.at(2, 1) = 0;
  EXPECT_THROW(FormalGroupLaw<ResidueRing>{f}, PreconditionError);  // not commutative
  BivariateSeries<ResidueRing> g(r, 6);
  g.at(1, 0) = 1;
  g.at(0, 1) = 1;
  g.at(1, 1) = 1;
  EXPECT_NO_THROW(FormalGroupLaw<ResidueRing>{g});
}

TEST(PSeries, MultiplicativeTwo) {
  ResidueRing r(2, 8);
  const auto gm = multiplicative_law(r, 10);
  const auto two = p_series(gm);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(two[i], i == 1 ? 2u : i == 2 ? 1u : 0u);
}

TEST(PSeries, HondaHeightTwoModTwo) {
  // over F_2 the Honda law has [2](x) = x^4 + ...
  ResidueRing r(2, 1);
  const auto f = honda_law(2, r, 17);
  const auto two = p_series(f);
  EXPECT_EQ(two.order(), std::optional<std::size_t>(4));
}

TEST(Height, Examples) {
  EXPECT_EQ(height(multiplicative_law(ResidueRing(3, 2), 10)).str(), "1");
  EXPECT_EQ(height(honda_law(2, ResidueRing(2, 4), 17)).str(), "2");
  EXPECT_EQ(height(honda_law(3, ResidueRing(3, 2), 28)).str(), "3");
  EXPECT_EQ(height(honda_law(2, WittRing(3, 2, 2), 10)).str(), "2");
  // additive law: [p](x) = px vanishes mod p
  EXPECT_EQ(height(additive_law(ResidueRing(2, 3), 9)).str(), ">= 4");
  EXPECT_EQ(height(additive_law(ResidueRing(3, 3), 10)).str(), ">= 3");
  // height 3 at p = 2 is invisible below x^8
  EXPECT_EQ(height(honda_law(3, ResidueRing(2, 3), 8)).str(), ">= 3");
}

TEST(Height, TruncationTooSmall) {
  try {
    height(multiplicative_law(ResidueRing(5, 2), 5));
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_STREQ(e.what(), "truncation too small to measure height");
  }
}

TEST(ScalarAction, IntegersMatchNSeries) {
  ResidueRing r(3, 5);
  const auto f = honda_law(1, r, 12);
  for (long n : {0L, 1L, 2L, 5L, 7L}) {
    const auto hom = a_series(f, {Integer(n)});
    EXPECT_EQ(hom.phi, n_series(f, static_cast<std::uint64_t>(n))) << n;
  }
}

TEST(ScalarAction, AdditiveAndMultiplicativeInA) {
  const WittRing w(2, 2, 6);
  const auto f = honda_law(2, w, 17);
  std::mt19937_64 rng(7);
  auto rand_scalar = [&] {
    return WittScalar{Integer(static_cast<unsigned long>(rng() % 64)),
                      Integer(static_cast<unsigned long>(rng() % 64))};
  };
  for (int t = 0; t < 4; ++t) {
    const auto a = rand_scalar();
    const auto b = rand_scalar();
    const auto fa = a_series(f, a);
    const auto fb = a_series(f, b);
    const auto fsum = a_series(f, scalar_add(a, b), false);
    const auto fprod = a_series(f, scalar_mul(w, a, b), false);
    EXPECT_EQ(fsum.phi, f.series().evaluate(fa.phi, fb.phi));
    EXPECT_EQ(fprod.phi, fa.phi.compose(fb.phi));
    EXPECT_TRUE(reduction_commutes(fa).commutes);
  }
}

TEST(ScalarAction, NonIntegralScalarRejected) {
  // (1+x)^t needs t(t-1)/2, and t^2 - t = -2t - 1 in W(F_4)
  const WittRing w(2, 2, 4);
  const auto gm = multiplicative_law(w, 6);
  try {
    a_series(gm, {Integer(0), Integer(1)});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("a does not act integrally"), std::string::npos);
  }
}

TEST(ScalarAction, CorruptedEndomorphismDetected) {
  const WittRing w(2, 2, 6);
  const auto f = honda_law(2, w, 17);
  auto hom = a_series(f, {Integer(3), Integer(5)});
  hom.phi[3] = w.add(hom.phi[3], w.one());
  const auto rep = reduction_commutes(hom);
  EXPECT_FALSE(rep.commutes);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_EQ(rep.witness->first + rep.witness->second, 3u);
}

TEST(Reduction, LawReducesCoefficientwise) {
  ResidueRing r(3, 4);
  const auto f = honda_law(1, r, 10);
  const auto f1 = f.reduced(1);
  for (std::size_t d = 0; d < 10; ++d)
    for (std::size_t j = 0; j <= d; ++j)
      EXPECT_EQ(f1.coefficient(d - j, j), f.coefficient(d - j, j) % 3);
}
