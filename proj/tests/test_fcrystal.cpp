#include <gtest/gtest.h>

#include <random>

#include "k3arith/fcrystal.hpp"
#include "k3arith/linalg.hpp"

using namespace k3arith;

namespace {

using SlopeMap = std::map<Rational, long>;

Polygon poly(std::initializer_list<std::pair<Rational, long>> s) {
  SlopeMap m;
  for (const auto& [a, b] : s) m[a] += b;
  return Polygon(m);
}

FCrystal diag(std::uint64_t p, int m, std::initializer_list<long> d) {
  IntMatrix f(d.size(), d.size());
  std::size_t i = 0;
  for (long x : d) {
    f(i, i) = x;
    ++i;
  }
  return FCrystal::over_prime_field(p, m, f);
}

using k3arith::linalg::random_unimodular;

}  // namespace

TEST(Polygon, VerticesAndValues) {
  const Polygon p = poly({{Rational(1, 2), 2}, {Rational(0), 1}, {Rational(2), 1}});
  EXPECT_EQ(p.str(), "{0:1, 1/2:2, 2:1}");
  EXPECT_EQ(p.length(), 4);
  EXPECT_EQ(p.value_at(2), Rational(1, 2));
  EXPECT_EQ(p.total(), 3);
  EXPECT_EQ(p.vertices().size(), 4U);
  EXPECT_EQ(p.shifted(Rational(-1)).str(), "{-1:1, -1/2:2, 1:1}");
}

TEST(Newton, Examples) {
  EXPECT_EQ(newton_polygon(diag(5, 12, {1, 5, 25})), poly({{0, 1}, {1, 1}, {2, 1}}));
  EXPECT_EQ(newton_polygon(FCrystal::over_prime_field(3, 12, IntMatrix{{0, 1}, {3, 0}})),
            poly({{Rational(1, 2), 2}}));
  EXPECT_EQ(newton_polygon(k3_model_crystal(3, 5)),
            poly({{Rational(2, 3), 3}, {Rational(1), 16}, {Rational(4, 3), 3}}));
}

TEST(Newton, AgreesWithDiagonalAndBlocks) {
  std::mt19937_64 rng(2);
  const auto a = FCrystal::over_prime_field(2, 12, IntMatrix{{0, 1, 0}, {0, 0, 1}, {2, 0, 0}});
  EXPECT_EQ(newton_polygon(a), poly({{Rational(1, 3), 3}}));
  IntMatrix blocks(5, 5);
  blocks(0, 1) = 1;
  blocks(1, 0) = 2;
  blocks(2, 2) = 4;
  blocks(3, 4) = 2;
  blocks(4, 3) = 4;
  EXPECT_EQ(newton_polygon(FCrystal::over_prime_field(2, 12, blocks)),
            poly({{Rational(1, 2), 2}, {Rational(3, 2), 2}, {Rational(2), 1}}));
}

TEST(Newton, InsufficientPrecision) {
  // det = p^5 cannot be seen at precision 4
  EXPECT_THROW(newton_polygon(diag(3, 4, {1, 243})), PrecisionError);
  EXPECT_THROW(hodge_polygon(diag(3, 4, {1, 243})), PrecisionError);
}

TEST(Newton, UnramifiedExtension) {
  // a = 2: F = diag(t, p) with t the generator; F sigma(F) = diag(t sigma(t), p^2)
  Matrix<FCrystal::Entry> f(2, 2);
  f(0, 0) = {Integer(0), Integer(1)};
  f(0, 1) = {Integer(0)};
  f(1, 0) = {Integer(0)};
  f(1, 1) = {Integer(3)};
  const FCrystal c(3, 2, 10, f);
  EXPECT_EQ(newton_polygon(c), poly({{0, 1}, {1, 1}}));
  EXPECT_EQ(hodge_polygon(c), poly({{0, 1}, {1, 1}}));
  // [[0, 1], [p, 0]] over W(F_9): F^2 = p, slope 1/2
  Matrix<FCrystal::Entry> g(2, 2);
  g(0, 0) = {Integer(0)};
  g(0, 1) = {Integer(1)};
  g(1, 0) = {Integer(3)};
  g(1, 1) = {Integer(0)};
  EXPECT_EQ(newton_polygon(FCrystal(3, 2, 10, g)), poly({{Rational(1, 2), 2}}));
}

TEST(Hodge, Examples) {
  EXPECT_EQ(hodge_polygon(diag(7, 12, {1, 7, 49})), poly({{0, 1}, {1, 1}, {2, 1}}));
  for (int h = 1; h <= 10; ++h) EXPECT_EQ(hodge_polygon(k3_model_crystal(h, 3)), k3_hodge_table());
  for (int h = 1; h <= 6; ++h) {
    IntMatrix f(h, h);
    for (int i = 0; i + 1 < h; ++i) f(i + 1, i) = 5;
    f(0, h - 1) += 1;
    SlopeMap expect{{Rational(0), 1}};
    if (h > 1) expect[Rational(1)] = h - 1;
    EXPECT_EQ(hodge_polygon(FCrystal::over_prime_field(5, 12, f)), Polygon(expect));
  }
}

TEST(Katz, DiagonalAndUnipotent) {
  const auto d = katz_check(diag(3, 12, {1, 3, 9, 3}));
  EXPECT_TRUE(d.passed);
  EXPECT_EQ(d.newton, d.hodge);
  const auto u = katz_check(FCrystal::over_prime_field(3, 12, IntMatrix{{3, 1}, {0, 3}}));
  EXPECT_TRUE(u.passed);
  EXPECT_EQ(u.newton, poly({{1, 2}}));
  EXPECT_EQ(u.hodge, poly({{0, 1}, {2, 1}}));
  EXPECT_GT(u.newton.value_at(1), u.hodge.value_at(1));
}

TEST(Katz, RandomCrystals) {
  std::mt19937_64 rng(23);
  for (std::uint64_t p : {2, 3, 5}) {
    for (int t = 0; t < 10; ++t) {
      IntMatrix f(5, 5);
      std::uniform_int_distribution<long> e(0, 1000);
      std::uniform_int_distribution<int> v(0, 2);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) f(i, j) = ipow(p, v(rng)) * e(rng);
      const auto c = FCrystal::over_prime_field(p, 12, f);
      const auto rep = katz_check(c);
      EXPECT_TRUE(rep.passed) << rep.message;
    }
  }
}

TEST(BaseChange, PolygonsInvariant) {
  std::mt19937_64 rng(29);
  const auto c = k3_model_crystal(4, 3);
  const auto g = random_unimodular(rng, 22);
  const auto d = base_change(c, g);
  EXPECT_FALSE(d == c);
  EXPECT_EQ(newton_polygon(d), newton_polygon(c));
  EXPECT_EQ(hodge_polygon(d), hodge_polygon(c));
  // semilinear base change over W(F_25)
  Matrix<FCrystal::Entry> f(2, 2), h(2, 2);
  f(0, 0) = {Integer(0)};
  f(0, 1) = {Integer(1)};
  f(1, 0) = {Integer(5)};
  f(1, 1) = {Integer(0)};
  h(0, 0) = {Integer(1), Integer(1)};
  h(0, 1) = {Integer(2), Integer(0)};
  h(1, 0) = {Integer(0), Integer(3)};
  h(1, 1) = {Integer(1), Integer(0)};
  const FCrystal e(5, 2, 8, f);
  EXPECT_EQ(newton_polygon(base_change(e, h)), newton_polygon(e));
  EXPECT_EQ(hodge_polygon(base_change(e, h)), hodge_polygon(e));
}

TEST(Twist, Shifts) {
  const auto c = diag(3, 12, {3, 3});
  EXPECT_EQ(newton_polygon(tate_twist(c, 0)), newton_polygon(c));
  EXPECT_EQ(newton_polygon(tate_twist(c, 1)), poly({{0, 2}}));
  const auto k = k3_model_crystal(3, 2);
  EXPECT_EQ(newton_polygon(tate_twist(k, 1)),
            poly({{Rational(-1, 3), 3}, {Rational(0), 16}, {Rational(1, 3), 3}}));
  const auto back = tate_twist(tate_twist(k, 2), -2);
  EXPECT_EQ(newton_polygon(back), newton_polygon(k));
  EXPECT_EQ(hodge_polygon(back), hodge_polygon(k));
}

TEST(K3Model, TableAndSums) {
  EXPECT_EQ(newton_polygon(k3_model_crystal(1, 2)), poly({{0, 1}, {1, 20}, {2, 1}}));
  EXPECT_EQ(newton_polygon(k3_model_crystal(2, 3)),
            poly({{Rational(1, 2), 2}, {Rational(1), 18}, {Rational(3, 2), 2}}));
  EXPECT_EQ(newton_polygon(k3_model_crystal(std::nullopt, 5)), poly({{1, 22}}));
  for (int h = 1; h <= 10; ++h) EXPECT_EQ(newton_polygon(k3_model_crystal(h, 2)).total(), 22);
  EXPECT_THROW(k3_model_crystal(11, 2), PreconditionError);
  EXPECT_THROW(k3_model_crystal(0, 2), PreconditionError);
}

TEST(K3Check, Verdicts) {
  const auto v4 = check_k3_crystal(k3_model_crystal(4, 3));
  EXPECT_EQ(v4.kind, K3Verdict::Kind::FiniteHeight);
  EXPECT_EQ(v4.height, 4);
  EXPECT_EQ(check_k3_crystal(k3_model_crystal(std::nullopt, 3)).kind,
            K3Verdict::Kind::Supersingular);
  const auto naive = check_k3_crystal(naive_companion_crystal(3, 3));
  EXPECT_EQ(naive.kind, K3Verdict::Kind::NotK3Shaped);
  EXPECT_EQ(naive.hodge, poly({{0, 4}, {1, 16}, {2, 1}, {4, 1}}));
  EXPECT_EQ(naive.newton, k3_newton_table(3));
  EXPECT_THROW(check_k3_crystal(diag(3, 12, {1, 3})), PreconditionError);
}

TEST(SlopeDecompose, AlreadySplit) {
  IntMatrix f(6, 6);
  f(0, 1) = 1;
  f(1, 0) = 3;
  for (std::size_t i = 2; i < 6; ++i) f(i, i) = 3;
  const auto c = FCrystal::over_prime_field(3, 12, f);
  const auto d = slope_decompose(c, Rational(1));
  EXPECT_EQ(d.sub.rank(), 2U);
  EXPECT_EQ(newton_polygon(d.sub), poly({{Rational(1, 2), 2}}));
  EXPECT_EQ(newton_polygon(d.quotient), poly({{1, 4}}));
}

TEST(SlopeDecompose, Conjugated) {
  std::mt19937_64 rng(31);
  IntMatrix f(6, 6);
  f(0, 1) = 1;
  f(1, 0) = 2;
  for (std::size_t i = 2; i < 6; ++i) f(i, i) = 2;
  const auto c = base_change(FCrystal::over_prime_field(2, 12, f), random_unimodular(rng, 6));
  const auto d = slope_decompose(c, Rational(1));
  EXPECT_EQ(newton_polygon(d.sub), poly({{Rational(1, 2), 2}}));
  EXPECT_EQ(newton_polygon(d.sub).joined(newton_polygon(d.quotient)), newton_polygon(c));
}

TEST(SlopeDecompose, K3Model) {
  std::mt19937_64 rng(37);
  for (int h : {2, 3}) {
    const auto c = base_change(k3_model_crystal(h, 3), random_unimodular(rng, 22));
    const auto d = slope_decompose(c, Rational(1));
    EXPECT_EQ(d.sub.rank(), static_cast<std::size_t>(h));
    EXPECT_EQ(newton_polygon(d.sub), poly({{Rational(h - 1, h), h}}));
  }
}

TEST(SlopeDecompose, Errors) {
  const auto c = FCrystal::over_prime_field(3, 12, IntMatrix{{3, 1}, {0, 3}});
  EXPECT_THROW(slope_decompose(c, Rational(1)), PreconditionError);
  // Newton {1:2} but Hodge {0:1,2:1}: a split at s = 3/2 is trivial
  EXPECT_THROW(slope_decompose(c, Rational(3, 2)), PreconditionError);
  // slopes 1/2 (x2) and 1 (x1) with Hodge {0:1, 1:2}: Katz condition holds at x=2
  // a crystal where it fails: [[0,1,0],[0,0,1],[9,0,0]] diag-summed with p
  IntMatrix g(4, 4);
  g(1, 0) = 1;
  g(2, 1) = 1;
  g(0, 2) = 27;  // slopes 1,1,1 from t^3 - 27, Hodge {0:2, 3:1}
  g(3, 3) = 9;   // slope 2
  const auto bad = FCrystal::over_prime_field(3, 12, g);
  EXPECT_THROW(
      {
        try {
          slope_decompose(bad, Rational(2));
        } catch (const PreconditionError& e) {
          EXPECT_NE(std::string(e.what()).find("Katz condition fails"), std::string::npos);
          throw;
        }
      },
      PreconditionError);
}

TEST(Charpoly, MatchesFaddeevLeVerrier) {
  // oracle: c_k = -(1/k) tr(A M_k), M_{k+1} = A M_k + c_k I, exact over Q
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> e(-20, 20);
  const detail::BigResidueRing ring(7, 60);
  const Integer mod = ipow(7, 60);
  for (std::size_t n = 1; n <= 7; ++n) {
    IntMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = e(rng);
    const RationalMatrix aq = to_rational(a);
    std::vector<Rational> expect{Rational(1)};
    RationalMatrix mk = identity_rational(n);
    for (std::size_t k = 1; k <= n; ++k) {
      const RationalMatrix am = aq * mk;
      Rational tr = 0;
      for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
      const Rational ck = -tr / Rational(static_cast<long>(k));
      expect.push_back(ck);
      mk = am + scaled(identity_rational(n), ck);
    }
    IntMatrix reduced(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) reduced(i, j) = mod_floor(a(i, j), mod);
    const auto got = detail::charpoly(ring, reduced);
    ASSERT_EQ(got.size(), n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      ASSERT_EQ(expect[k].get_den(), 1);
      EXPECT_EQ(got[k], mod_floor(expect[k].get_num(), mod)) << "n=" << n << " k=" << k;
    }
  }
}
