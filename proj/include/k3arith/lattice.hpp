#pragma once

// Integral quadratic lattices: standard constructors (U, E8, the K3 lattice),
// invariants, orthogonal complements and the embedding of
// E8^2 + U^2 + <2d> into the lattice E8^2 + U^2 + [[2d,1],[1,2p]], which has
// discriminant 4dp - 1 and is therefore self-dual at p.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/linalg.hpp"
#include "k3arith/matrix.hpp"

namespace k3arith {

class QuadLattice {
 public:
  QuadLattice() = default;
  explicit QuadLattice(IntMatrix gram) : gram_(std::move(gram)) {
    if (!is_symmetric(gram_)) throw PreconditionError("Gram matrix is not symmetric");
  }

  [[nodiscard]] std::size_t rank() const { return gram_.rows(); }
  [[nodiscard]] const IntMatrix& gram() const { return gram_; }

  /// (x, x) is even for every x, i.e. the diagonal is even.
  [[nodiscard]] bool is_even() const {
    for (std::size_t i = 0; i < rank(); ++i)
      if (mpz_odd_p(gram_(i, i).get_mpz_t())) return false;
    return true;
  }

  /// (u, v) for coordinate vectors.
  [[nodiscard]] Integer pair(std::span<const Integer> u, std::span<const Integer> v) const {
    Integer s = 0;
    for (std::size_t i = 0; i < rank(); ++i) {
      if (u[i] == 0) continue;
      for (std::size_t j = 0; j < rank(); ++j) s += u[i] * gram_(i, j) * v[j];
    }
    return s;
  }

  friend bool operator==(const QuadLattice&, const QuadLattice&) = default;

 private:
  IntMatrix gram_;
};

struct Signature {
  std::size_t positive = 0;
  std::size_t negative = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

inline QuadLattice hyperbolic_plane() { return QuadLattice(IntMatrix{{0, 1}, {1, 0}}); }

/// E8 root lattice in the Bourbaki labelling: chain 1-3-4-5-6-7-8, node 2
/// attached to node 4. Positive definite, even, unimodular.
inline QuadLattice e8_lattice() {
  IntMatrix g(8, 8, Integer(0));
  for (std::size_t i = 0; i < 8; ++i) g(i, i) = 2;
  const std::pair<int, int> edges[] = {{1, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {2, 4}};
  for (auto [a, b] : edges) {
    g(a - 1, b - 1) = -1;
    g(b - 1, a - 1) = -1;
  }
  return QuadLattice(std::move(g));
}

/// Rank-one lattice <2d>.
inline QuadLattice span2d(long d) {
  if (d < 1) throw PreconditionError("span2d requires d >= 1");
  return QuadLattice(IntMatrix{{Integer(2 * d)}});
}

inline QuadLattice direct_sum(const QuadLattice& a, const QuadLattice& b) {
  const std::size_t n = a.rank() + b.rank();
  IntMatrix g(n, n, Integer(0));
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t j = 0; j < a.rank(); ++j) g(i, j) = a.gram()(i, j);
  for (std::size_t i = 0; i < b.rank(); ++i)
    for (std::size_t j = 0; j < b.rank(); ++j) g(a.rank() + i, a.rank() + j) = b.gram()(i, j);
  return QuadLattice(std::move(g));
}

inline QuadLattice direct_sum(std::initializer_list<QuadLattice> parts) {
  QuadLattice acc;
  for (const auto& p : parts) acc = direct_sum(acc, p);
  return acc;
}

/// E8^2 + U^3 in that order (coordinates 0..15 are E8, then x1 y1 x2 y2 x3 y3).
inline QuadLattice k3_lattice() {
  const auto e8 = e8_lattice();
  const auto u = hyperbolic_plane();
  return direct_sum({e8, e8, u, u, u});
}

/// Named constructor: "U", "E8", "K3" or "span2d" (which needs d >= 1).
inline QuadLattice standard_lattice(std::string_view name, long d = 0) {
  if (name == "U") return hyperbolic_plane();
  if (name == "E8") return e8_lattice();
  if (name == "K3") return k3_lattice();
  if (name == "span2d") return span2d(d);
  throw PreconditionError("unknown lattice name: " + std::string(name));
}

/// Signed determinant of the Gram matrix.
inline Integer discriminant(const QuadLattice& a) { return linalg::determinant(a.gram()); }

inline Signature signature(const QuadLattice& a) {
  const auto in = linalg::inertia(to_rational(a.gram()));
  if (in.zero != 0) throw PreconditionError("degenerate form");
  return {in.positive, in.negative};
}

inline bool is_self_dual_at(const QuadLattice& a, std::uint64_t p) {
  require_prime(p);
  const Integer d = discriminant(a);
  return !mpz_divisible_ui_p(d.get_mpz_t(), p);
}

/// Invariant factors of L^vee / L, omitting 1s.
inline std::vector<Integer> discriminant_group(const QuadLattice& a) {
  const auto s = linalg::smith_form(a.gram());
  if (s.rank < a.rank()) throw PreconditionError("degenerate form");
  std::vector<Integer> out;
  for (const auto& d : s.diagonal)
    if (d != 1) out.push_back(d);
  return out;
}

/// A sublattice given by the ambient coordinates of its basis (as columns).
class SublatticeEmbedding {
 public:
  SublatticeEmbedding(QuadLattice ambient, IntMatrix matrix)
      : ambient_(std::move(ambient)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != ambient_.rank())
      throw PreconditionError("embedding matrix rows must equal ambient rank");
    sub_ = QuadLattice(matrix_.transpose() * ambient_.gram() * matrix_);
  }
  SublatticeEmbedding(QuadLattice ambient, QuadLattice sub, IntMatrix matrix)
      : SublatticeEmbedding(std::move(ambient), std::move(matrix)) {
    if (!(sub_ == sub)) throw PreconditionError("embedding is not an isometry");
  }

  [[nodiscard]] const QuadLattice& ambient() const { return ambient_; }
  [[nodiscard]] const QuadLattice& sub() const { return sub_; }
  [[nodiscard]] const IntMatrix& matrix() const { return matrix_; }

  [[nodiscard]] std::vector<Integer> elementary_divisors() const {
    return linalg::smith_form(matrix_).diagonal;
  }

  /// Injective with torsion-free cokernel: all elementary divisors are 1.
  [[nodiscard]] bool is_primitive() const {
    const auto s = linalg::smith_form(matrix_);
    if (s.rank < matrix_.cols()) return false;
    for (const auto& d : s.diagonal)
      if (d != 1) return false;
    return true;
  }

 private:
  QuadLattice ambient_;
  QuadLattice sub_;
  IntMatrix matrix_;
};

/// {v in ambient : (v, s) = 0 for all s in sub}, which is saturated.
inline SublatticeEmbedding orthogonal_complement(const SublatticeEmbedding& e) {
  const IntMatrix constraints = e.matrix().transpose() * e.ambient().gram();
  return SublatticeEmbedding(e.ambient(), linalg::integer_kernel(constraints));
}

struct SelfDualEmbedding {
  QuadLattice lattice;        // E8^2 + U^2 + <2d>
  QuadLattice ambient;        // E8^2 + U^2 + L', L' = [[2d,1],[1,2p]]
  SublatticeEmbedding embedding;
};

inline SelfDualEmbedding embed_into_selfdual(long d, std::uint64_t p) {
  if (d < 1) throw PreconditionError("d must be positive");
  require_prime(p);
  const auto e8 = e8_lattice();
  const auto u = hyperbolic_plane();
  const QuadLattice core = direct_sum({e8, e8, u, u});
  const QuadLattice lattice = direct_sum(core, span2d(d));
  const QuadLattice lprime(IntMatrix{{Integer(2 * d), Integer(1)},
                                     {Integer(1), Integer(2) * from_u64(p)}});
  const QuadLattice ambient = direct_sum(core, lprime);
  IntMatrix m(ambient.rank(), lattice.rank(), Integer(0));
  for (std::size_t i = 0; i < core.rank(); ++i) m(i, i) = 1;
  m(core.rank(), core.rank()) = 1;  // generator of <2d> -> v1
  return {lattice, ambient, SublatticeEmbedding(ambient, lattice, std::move(m))};
}

}  // namespace k3arith
