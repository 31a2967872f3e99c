#include <gtest/gtest.h>

#include <random>

#include "k3arith/lattice.hpp"

using namespace k3arith;

namespace {

QuadLattice lattice_L(long d) {
  const auto e8 = e8_lattice();
  const auto u = hyperbolic_plane();
  return direct_sum({e8, e8, u, u, span2d(d)});
}

}  // namespace

TEST(StandardLattice, HyperbolicPlane) {
  EXPECT_EQ(standard_lattice("U").gram(), (IntMatrix{{0, 1}, {1, 0}}));
  EXPECT_EQ(discriminant(hyperbolic_plane()), -1);
  EXPECT_EQ(signature(hyperbolic_plane()), (Signature{1, 1}));
}

TEST(StandardLattice, E8IsEvenUnimodularDefinite) {
  const auto e8 = e8_lattice();
  EXPECT_TRUE(e8.is_even());
  EXPECT_EQ(discriminant(e8), 1);
  EXPECT_EQ(signature(e8), (Signature{8, 0}));
  EXPECT_TRUE(is_self_dual_at(e8, 2));
  EXPECT_TRUE(is_self_dual_at(e8, 11));
}

TEST(StandardLattice, K3) {
  const auto k3 = standard_lattice("K3");
  EXPECT_EQ(k3.rank(), 22U);
  EXPECT_EQ(signature(k3), (Signature{19, 3}));
  EXPECT_EQ(discriminant(k3), -1);
  EXPECT_TRUE(k3.is_even());
}

TEST(StandardLattice, Span2dAndErrors) {
  EXPECT_EQ(standard_lattice("span2d", 7).gram(), (IntMatrix{{14}}));
  EXPECT_THROW(standard_lattice("span2d", 0), PreconditionError);
  EXPECT_THROW(standard_lattice("D4"), PreconditionError);
}

TEST(DirectSum, DeterminantsMultiply) {
  const auto u = hyperbolic_plane();
  const auto uu = direct_sum(u, u);
  EXPECT_EQ(uu.rank(), 4U);
  EXPECT_EQ(discriminant(uu), 1);
  EXPECT_EQ(direct_sum(u, QuadLattice()), u);
  EXPECT_EQ(discriminant(direct_sum(e8_lattice(), u)), -1);
}

TEST(Discriminant, LatticeL) {
  EXPECT_EQ(discriminant(lattice_L(3)), 6);
  EXPECT_EQ(signature(lattice_L(3)), (Signature{19, 2}));
  EXPECT_FALSE(is_self_dual_at(lattice_L(3), 3));
}

TEST(DiscriminantGroup, Examples) {
  EXPECT_TRUE(discriminant_group(hyperbolic_plane()).empty());
  EXPECT_EQ(discriminant_group(span2d(6)), std::vector<Integer>{Integer(12)});
  EXPECT_EQ(discriminant_group(lattice_L(5)), std::vector<Integer>{Integer(10)});
  EXPECT_THROW(discriminant_group(QuadLattice(IntMatrix{{2, 2}, {2, 2}})), PreconditionError);
}

TEST(Signature, DegenerateRejected) {
  EXPECT_THROW(signature(QuadLattice(IntMatrix{{0, 0}, {0, 2}})), PreconditionError);
  EXPECT_THROW(QuadLattice(IntMatrix{{0, 1}, {2, 0}}), PreconditionError);
}

TEST(Properties, RandomSumsAndFactors) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> entry(-3, 3);
  auto random_lattice = [&](std::size_t n) {
    for (;;) {
      IntMatrix g(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) g(i, j) = g(j, i) = (i == j) ? 2 * entry(rng) : entry(rng);
      QuadLattice a(g);
      if (discriminant(a) != 0) return a;
    }
  };
  for (int t = 0; t < 40; ++t) {
    const auto a = random_lattice(1 + t % 4), b = random_lattice(1 + t % 3);
    const auto s = direct_sum(a, b);
    EXPECT_EQ(discriminant(s), discriminant(a) * discriminant(b));
    const auto sa = signature(a), sb = signature(b), ss = signature(s);
    EXPECT_EQ(ss.positive, sa.positive + sb.positive);
    EXPECT_EQ(ss.negative, sa.negative + sb.negative);
    Integer prod = 1;
    for (const auto& f : discriminant_group(s)) prod *= f;
    EXPECT_EQ(prod, abs(discriminant(s)));
  }
}

TEST(Complement, OfXMinusDyInK3) {
  const auto k3 = k3_lattice();
  const long d = 2;
  IntMatrix v(22, 1);
  v(20, 0) = 1;   // x of the last U
  v(21, 0) = -d;  // -d y
  const SublatticeEmbedding line(k3, v);
  const auto comp = orthogonal_complement(line);
  EXPECT_EQ(comp.sub().rank(), 21U);
  EXPECT_EQ(discriminant(comp.sub()), 4);
  EXPECT_EQ(signature(comp.sub()), (Signature{19, 2}));
  EXPECT_TRUE(comp.is_primitive());
  EXPECT_EQ(discriminant_group(comp.sub()), std::vector<Integer>{Integer(4)});
}

TEST(Complement, BlockAndFull) {
  const auto u = hyperbolic_plane();
  const auto uu = direct_sum(u, u);
  IntMatrix first(4, 2);
  first(0, 0) = 1;
  first(1, 1) = 1;
  const auto comp = orthogonal_complement(SublatticeEmbedding(uu, first));
  EXPECT_EQ(comp.sub(), u);
  EXPECT_EQ(comp.matrix(), (IntMatrix{{0, 0}, {0, 0}, {1, 0}, {0, 1}}));
  const auto none = orthogonal_complement(SublatticeEmbedding(uu, identity_int(4)));
  EXPECT_EQ(none.sub().rank(), 0U);
}

TEST(Complement, DoubleComplementOfPrimitive) {
  const auto k3 = k3_lattice();
  IntMatrix v(22, 1);
  v(16, 0) = 1;
  v(17, 0) = 3;
  const SublatticeEmbedding line(k3, v);
  const auto back = orthogonal_complement(orthogonal_complement(line));
  ASSERT_EQ(back.sub().rank(), 1U);
  // same saturated line, up to sign
  EXPECT_TRUE(back.matrix() == v || back.matrix() == scaled(v, Integer(-1)));
}

TEST(Embedding, SmallCases) {
  const auto r = embed_into_selfdual(1, 2);
  EXPECT_EQ(discriminant(r.ambient), 7);
  EXPECT_TRUE(is_self_dual_at(r.ambient, 2));
  EXPECT_TRUE(r.embedding.is_primitive());
  const auto s = embed_into_selfdual(6, 5);
  EXPECT_EQ(discriminant(s.ambient), 119);
  EXPECT_TRUE(is_self_dual_at(s.ambient, 5));
  EXPECT_EQ(signature(s.ambient), (Signature{20, 2}));
  EXPECT_EQ(s.embedding.sub(), s.lattice);
}

TEST(Embedding, RejectsBadArguments) {
  EXPECT_THROW(embed_into_selfdual(0, 2), PreconditionError);
  EXPECT_THROW(embed_into_selfdual(1, 4), PreconditionError);
}
