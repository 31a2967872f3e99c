#include <gtest/gtest.h>

#include <random>

#include "k3arith/clifford.hpp"

using namespace k3arith;

namespace {

RationalMatrix hyperbolic_plus_diag(std::initializer_list<long> diag) {
  const std::size_t n = 2 + diag.size();
  RationalMatrix g(n, n);
  g(0, 1) = g(1, 0) = 1;
  std::size_t k = 2;
  for (long d : diag) {
    g(k, k) = d;
    ++k;
  }
  return g;
}

RationalVector unit(std::size_t n, std::size_t i) {
  RationalVector v(n, Rational(0));
  v[i] = 1;
  return v;
}

RationalVector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-4, 4);
  RationalVector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

RationalMatrix random_even_gram(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-2, 2);
  for (;;) {
    RationalMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) g(i, j) = g(j, i) = (i == j) ? 2 * d(rng) : d(rng);
    if (linalg::rank(g) == n) return g;
  }
}

}  // namespace

TEST(CliffordMul, HyperbolicRelation) {
  const CliffordAlgebra cl(hyperbolic_plane());
  const auto x = cl.generator(0), y = cl.generator(1);
  EXPECT_EQ(x * y + y * x, cl.scalar(1));
  EXPECT_TRUE((x * x).is_zero());
  const auto a = x * y - cl.scalar(3);
  EXPECT_EQ(cl.scalar(1) * a, a);
  EXPECT_EQ(a * cl.scalar(1), a);
}

TEST(CliffordMul, SquaresAndAssociativity) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 6; ++n) {
    const CliffordAlgebra cl(random_even_gram(rng, n));
    for (int t = 0; t < 100 / 6 + 1; ++t) {
      const auto v = random_vector(rng, n);
      const auto cv = cl.vector(v);
      EXPECT_EQ(cv * cv, cl.scalar(cl.q(v)));
    }
    const auto a = cl.vector(random_vector(rng, n)) * cl.vector(random_vector(rng, n)) + cl.scalar(2);
    const auto b = cl.vector(random_vector(rng, n));
    const auto c = cl.vector(random_vector(rng, n)) * cl.vector(random_vector(rng, n));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_TRUE((a * c).is_even());
    EXPECT_TRUE((a * b).is_odd());
  }
}

TEST(CliffordMul, MismatchedParents) {
  const CliffordAlgebra a(hyperbolic_plane()), b(hyperbolic_plane());
  EXPECT_THROW(a.generator(0) * b.generator(0), PreconditionError);
}

TEST(Operators, LeftMultiplication) {
  const CliffordAlgebra cl(hyperbolic_plane());
  const auto zero = cl.lmul_operator(RationalVector{0, 0});
  EXPECT_EQ(zero, RationalMatrix(4, 4));
  const auto ix = cl.lmul_operator(unit(2, 0));
  EXPECT_EQ(ix * ix, RationalMatrix(4, 4));
  std::mt19937_64 rng(5);
  const CliffordAlgebra c4(random_even_gram(rng, 4));
  for (int t = 0; t < 10; ++t) {
    const auto v = random_vector(rng, 4), w = random_vector(rng, 4);
    const auto iv = c4.lmul_operator(v), iw = c4.lmul_operator(w);
    EXPECT_EQ(iv * iw + iw * iv, scaled(identity_rational(16), c4.pair(v, w)));
    EXPECT_EQ(iv, c4.lmul_operator(c4.vector(v)));
  }
}

TEST(Operators, DenseBound) {
  const CliffordAlgebra big(identity_rational(13));
  EXPECT_THROW(big.lmul_operator(unit(13, 0)), PreconditionError);
}

TEST(TracePair, Examples) {
  const CliffordAlgebra e8(e8_lattice());
  for (std::size_t i = 0; i < 8; ++i) {
    const auto iv = e8.lmul_operator(unit(8, i));
    EXPECT_EQ(trace_pair(iv, iv), 2);
  }
  EXPECT_EQ(trace_pair(identity_rational(256), identity_rational(256)), 2);
  std::mt19937_64 rng(11);
  const CliffordAlgebra cl(random_even_gram(rng, 3));
  const auto g = cl.lmul_operator(cl.vector(random_vector(rng, 3)) * cl.vector(random_vector(rng, 3)));
  const auto h = cl.rmul_operator(cl.vector(random_vector(rng, 3)) + cl.scalar(5));
  EXPECT_EQ(trace_pair(g, h), trace_pair(h, g));
  EXPECT_THROW(trace_pair(identity_rational(4), identity_rational(8)), PreconditionError);
}

TEST(TracePair, IsometryOnRandomLattices) {
  std::mt19937_64 rng(13);
  for (std::size_t n = 2; n <= 6; ++n) {
    const CliffordAlgebra cl(random_even_gram(rng, n));
    for (int t = 0; t < 5; ++t) {
      const auto v = random_vector(rng, n), w = random_vector(rng, n);
      EXPECT_EQ(trace_pair(cl.lmul_operator(v), cl.lmul_operator(w)), cl.pair(v, w));
    }
  }
}

TEST(Projector, Properties) {
  std::mt19937_64 rng(17);
  const CliffordAlgebra cl(hyperbolic_plus_diag({2, -4}));
  const Projector pi(cl);
  const auto v = random_vector(rng, 4);
  EXPECT_EQ(pi.apply(cl.lmul_operator(v)), cl.lmul_operator(v));
  EXPECT_EQ(pi.apply(identity_rational(16)), RationalMatrix(16, 16));
  const auto g = cl.lmul_operator(cl.vector(random_vector(rng, 4)) * cl.vector(random_vector(rng, 4)) +
                                  cl.vector(random_vector(rng, 4))) +
                 cl.rmul_operator(cl.generator(2) * cl.generator(3));
  const auto pg = pi.apply(g);
  EXPECT_EQ(pi.apply(pg), pg);
  EXPECT_EQ(pi.apply_hyperbolic(g), pg);
  const auto k = g - pg;
  for (const auto& b : pi.basis_operators()) EXPECT_EQ(trace_pair(k, b), 0);
}

TEST(Projector, HyperbolicBasisShape) {
  const CliffordAlgebra cl(hyperbolic_plus_diag({2, 2}));
  const Projector pi(cl);
  const auto hb = pi.hyperbolic_basis();
  const auto g = hb.transpose() * cl.gram() * hb;
  EXPECT_EQ(g(0, 0), 0);
  EXPECT_EQ(g(1, 1), 0);
  EXPECT_EQ(g(0, 1), 1);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j && !(i + j == 1)) {
        EXPECT_EQ(g(i, j), 0);
      }
  const CliffordAlgebra definite(e8_lattice());
  const Projector pe(definite);
  EXPECT_THROW((void)pe.hyperbolic_basis(), PreconditionError);
}

TEST(Projector, IntegralityExponent) {
  const CliffordAlgebra cl(hyperbolic_plane());
  const Projector pi(cl);
  // pi(E_ab) has coefficients 2^{-1} i(w*)[b][a]; at rank 2 over U these are 1/2
  EXPECT_EQ(pi.integrality_exponent(2), 1);
  EXPECT_EQ(pi.integrality_exponent(3), 0);
  const CliffordAlgebra d(hyperbolic_plus_diag({6}));
  EXPECT_EQ(Projector(d).integrality_exponent(3), 1);
}

TEST(Filtration, RankTwoAndFour) {
  const CliffordAlgebra u(hyperbolic_plane());
  const auto f2 = isotropic_filtration(u, unit(2, 0));
  EXPECT_EQ(f2.on_clifford.at(0).cols(), 2U);
  EXPECT_EQ(f2.on_clifford.at(1).cols(), 0U);
  EXPECT_EQ(f2.on_clifford.at(-1).cols(), 4U);
  EXPECT_EQ(f2.on_lattice.at(1).cols(), 1U);
  EXPECT_EQ(f2.on_lattice.at(0).cols(), 1U);
  EXPECT_EQ(f2.on_lattice.at(-1).cols(), 2U);
  const CliffordAlgebra c4(hyperbolic_plus_diag({2, 2}));
  const auto f4 = isotropic_filtration(c4, unit(4, 0));
  EXPECT_EQ(f4.on_clifford.at(0).cols(), 8U);
  EXPECT_EQ(f4.on_lattice.at(0).cols(), 3U);
}

TEST(Filtration, Preconditions) {
  const CliffordAlgebra c4(hyperbolic_plus_diag({2, 2}));
  EXPECT_THROW(isotropic_filtration(c4, unit(4, 2)), PreconditionError);
  EXPECT_THROW(isotropic_filtration(c4, RationalVector(4, Rational(0))), PreconditionError);
  EXPECT_THROW(filtration_compatibility_check(c4, unit(4, 3)), PreconditionError);
}

TEST(Filtration, CompatibilityRankFour) {
  const CliffordAlgebra c4(hyperbolic_plus_diag({2, 2}));
  const auto rep = filtration_compatibility_check(c4, unit(4, 0));
  EXPECT_TRUE(rep.passed());
  for (const auto& w : rep.witnesses) ADD_FAILURE() << w;
  // i(e) sends all of H into Fil^0 and kills Fil^0
  const auto ie = c4.lmul_operator(unit(4, 0));
  const EndFiltration end(isotropic_filtration(c4, unit(4, 0)).on_clifford.at(0));
  EXPECT_TRUE(end.contains(1, ie));
  EXPECT_FALSE(end.contains(1, identity_rational(16)));
  EXPECT_TRUE(end.contains(0, identity_rational(16)));
}

TEST(Filtration, NonBasisIsotropicVector) {
  RationalMatrix g = hyperbolic_plus_diag({2, -2});
  const CliffordAlgebra cl(g);
  RationalVector e{0, 0, 1, 1};  // q = (2 - 2)/2 = 0
  EXPECT_EQ(isotropic_filtration(cl, e).on_clifford.at(0).cols(), 8U);
  EXPECT_TRUE(filtration_compatibility_check(cl, e).passed());
}

TEST(Filtration, StructuralCount) {
  const CliffordAlgebra c4(hyperbolic_plus_diag({2, 2}));
  EXPECT_EQ(structural_filtration_dimension(c4.gram(), unit(4, 0)), 8U);
  EXPECT_EQ(structural_filtration_dimension(c4.gram(), RationalVector{0, 3, 0, 0}), 8U);
  EXPECT_THROW(structural_filtration_dimension(c4.gram(), unit(4, 2)), PreconditionError);
}

TEST(GSpin, Examples) {
  std::mt19937_64 rng(19);
  const CliffordAlgebra cl(hyperbolic_plus_diag({2, 4}));
  EXPECT_TRUE(gspin_membership(cl, cl.scalar(1)).member);
  const RationalVector v{1, 1, 0, 0}, w{0, 0, 1, 1};
  ASSERT_NE(cl.q(v), 0);
  ASSERT_NE(cl.q(w), 0);
  const auto odd = gspin_membership(cl, cl.vector(v));
  EXPECT_FALSE(odd.member);
  EXPECT_EQ(odd.reason, "element is not even");
  const auto vw = gspin_membership(cl, cl.vector(v) * cl.vector(w));
  ASSERT_TRUE(vw.member);
  auto reflection = [&](const RationalVector& r) {
    RationalMatrix s = identity_rational(4);
    RationalMatrix rr(4, 1);
    for (std::size_t k = 0; k < 4; ++k) rr(k, 0) = r[k];
    RationalMatrix gr = rr.transpose() * cl.gram();  // x -> (r, x)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) s(i, j) -= rr(i, 0) * gr(0, j) / cl.q(r);
    return s;
  };
  EXPECT_EQ(vw.action, reflection(v) * reflection(w));
  const RationalVector u{1, 1, 1, 0};
  ASSERT_NE(cl.q(u), 0);
  const auto prod = cl.vector(v) * cl.vector(w) * cl.vector(w) * cl.vector(u);
  EXPECT_TRUE(gspin_membership(cl, prod).member);
  // xy is an idempotent in Cl(U), hence not a unit
  const auto idem = gspin_membership(cl, cl.generator(0) * cl.generator(1));
  EXPECT_FALSE(idem.member);
  EXPECT_EQ(idem.reason, "element is not invertible");
}

TEST(Projector, CheckerOnSmallRanks) {
  std::mt19937_64 rng(41);
  for (const auto& g : {hyperbolic_plus_diag({}), hyperbolic_plus_diag({2, -4}),
                        hyperbolic_plus_diag({2, 2, 6, -2})}) {
    const CliffordAlgebra cl(g);
    const auto rep = check_projector(Projector(cl), rng, 3);
    EXPECT_TRUE(rep.passed());
    EXPECT_EQ(rep.hyperbolic_agrees, std::optional<bool>(true));
    for (const auto& w : rep.witnesses) ADD_FAILURE() << w;
  }
  const auto definite = check_projector(Projector(CliffordAlgebra(RationalMatrix{{2, 1}, {1, 2}})), rng, 3);
  EXPECT_TRUE(definite.passed());
  EXPECT_FALSE(definite.hyperbolic_agrees.has_value());
}
