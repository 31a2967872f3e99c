#pragma once

// Exact linear algebra over Z and Q: fraction-free determinants, Smith
// normal form with unimodular transforms, reduced row echelon forms and
// congruence diagonalization of symmetric forms.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/matrix.hpp"

namespace k3arith::linalg {

/// Determinant by Bareiss fraction-free elimination.
inline Integer determinant(IntMatrix a) {
  if (!a.is_square()) throw PreconditionError("determinant of non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  int sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t r = k + 1;
      while (r < n && a(r, k) == 0) ++r;
      if (r == n) return 0;
      a.swap_rows(k, r);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(a(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      a(i, k) = 0;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

struct SmithForm {
  std::vector<Integer> diagonal;  // d_1 | d_2 | ... , nonnegative, length min(m,n)
  IntMatrix left;                 // unimodular, left * A * right = diag
  IntMatrix right;
  std::size_t rank = 0;
};

/// Smith normal form over Z with transforms.
inline SmithForm smith_form(const IntMatrix& input) {
  IntMatrix a = input;
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  IntMatrix left = identity_int(m);
  IntMatrix right = identity_int(n);

  auto row_axpy = [&](std::size_t dst, std::size_t src, const Integer& c) {
    // row_dst -= c * row_src
    for (std::size_t j = 0; j < n; ++j) a(dst, j) -= c * a(src, j);
    for (std::size_t j = 0; j < m; ++j) left(dst, j) -= c * left(src, j);
  };
  auto col_axpy = [&](std::size_t dst, std::size_t src, const Integer& c) {
    for (std::size_t i = 0; i < m; ++i) a(i, dst) -= c * a(i, src);
    for (std::size_t i = 0; i < n; ++i) right(i, dst) -= c * right(i, src);
  };

  const std::size_t steps = std::min(m, n);
  std::size_t rank = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    // pivot: smallest nonzero absolute value in the trailing block
    auto place_min = [&]() -> bool {
      std::optional<std::pair<std::size_t, std::size_t>> best;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (a(i, j) != 0 &&
              (!best || abs(a(i, j)) < abs(a(best->first, best->second))))
            best = {i, j};
      if (!best) return false;
      a.swap_rows(t, best->first);
      left.swap_rows(t, best->first);
      a.swap_cols(t, best->second);
      right.swap_cols(t, best->second);
      return true;
    };
    if (!place_min()) break;
    for (;;) {
      bool dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a(i, t) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), a(i, t).get_mpz_t(), a(t, t).get_mpz_t());
        row_axpy(i, t, q);
        if (a(i, t) != 0) dirty = true;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a(t, j) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), a(t, j).get_mpz_t(), a(t, t).get_mpz_t());
        col_axpy(j, t, q);
        if (a(t, j) != 0) dirty = true;
      }
      if (dirty) {
        place_min();
        continue;
      }
      // divisibility of the trailing block by the pivot
      std::optional<std::size_t> bad_row;
      for (std::size_t i = t + 1; i < m && !bad_row; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!mpz_divisible_p(a(i, j).get_mpz_t(), a(t, t).get_mpz_t())) {
            bad_row = i;
            break;
          }
      if (!bad_row) break;
      row_axpy(t, *bad_row, Integer(-1));
    }
    if (a(t, t) < 0) {
      for (std::size_t j = 0; j < n; ++j) a(t, j) = -a(t, j);
      for (std::size_t j = 0; j < m; ++j) left(t, j) = -left(t, j);
    }
    ++rank;
  }
  SmithForm out;
  out.diagonal.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.diagonal.push_back(a(t, t));
  out.left = std::move(left);
  out.right = std::move(right);
  out.rank = rank;
  return out;
}

/// Z-basis (as columns) of the integer kernel {x in Z^n : A x = 0}.
/// The kernel of an integer matrix is always saturated in Z^n.
inline IntMatrix integer_kernel(const IntMatrix& a) {
  const std::size_t n = a.cols();
  if (a.rows() == 0) return identity_int(n);
  SmithForm s = smith_form(a);
  IntMatrix k(n, n - s.rank);
  for (std::size_t c = s.rank; c < n; ++c)
    for (std::size_t i = 0; i < n; ++i) k(i, c - s.rank) = s.right(i, c);
  return k;
}

// ---------------------------------------------------------------- rationals

struct EchelonForm {
  RationalMatrix reduced;
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

inline EchelonForm rref(RationalMatrix a) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = r;
    while (p < a.rows() && sgn(a(p, c)) == 0) ++p;
    if (p == a.rows()) continue;
    a.swap_rows(r, p);
    const Rational inv = 1 / a(r, c);
    for (std::size_t j = c; j < a.cols(); ++j)
      if (sgn(a(r, j)) != 0) a(r, j) *= inv;
    std::vector<std::size_t> support;
    for (std::size_t j = c; j < a.cols(); ++j)
      if (sgn(a(r, j)) != 0) support.push_back(j);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || sgn(a(i, c)) == 0) continue;
      const Rational f = a(i, c);
      for (std::size_t j : support) a(i, j) -= f * a(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(a), std::move(pivots)};
}

inline std::size_t rank(const RationalMatrix& a) { return rref(a).pivots.size(); }

/// Basis (as columns) of the column space, taken from the columns of `a`.
inline RationalMatrix column_space(const RationalMatrix& a) {
  const auto piv = rref(a).pivots;
  RationalMatrix b(a.rows(), piv.size());
  for (std::size_t k = 0; k < piv.size(); ++k)
    for (std::size_t i = 0; i < a.rows(); ++i) b(i, k) = a(i, piv[k]);
  return b;
}

/// Basis (as columns) of {x : A x = 0}.
inline RationalMatrix nullspace(const RationalMatrix& a) {
  EchelonForm e = rref(a);
  const std::size_t n = a.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto c : e.pivots) is_pivot[c] = true;
  RationalMatrix basis(n, n - e.pivots.size());
  std::size_t k = 0;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    basis(free, k) = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r)
      basis(e.pivots[r], k) = -e.reduced(r, free);
    ++k;
  }
  return basis;
}

inline std::optional<RationalMatrix> inverse(const RationalMatrix& a) {
  if (!a.is_square()) throw PreconditionError("inverse of non-square matrix");
  const std::size_t n = a.rows();
  RationalMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  EchelonForm e = rref(std::move(aug));
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) return std::nullopt;
  return e.reduced.block(0, n, n, n);
}

/// Some solution of A x = b, if one exists.
inline std::optional<std::vector<Rational>> solve(const RationalMatrix& a,
                                                  std::span<const Rational> b) {
  if (b.size() != a.rows()) throw PreconditionError("dimension mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  EchelonForm e = rref(std::move(aug));
  if (!e.pivots.empty() && e.pivots.back() == a.cols()) return std::nullopt;
  std::vector<Rational> x(a.cols(), Rational(0));
  for (std::size_t r = 0; r < e.pivots.size(); ++r)
    x[e.pivots[r]] = e.reduced(r, a.cols());
  return x;
}

/// True iff every column of `sub` lies in the column span of `space`.
inline bool columns_in_span(const RationalMatrix& sub, const RationalMatrix& space) {
  if (sub.cols() == 0) return true;
  RationalMatrix joined(space.rows(), space.cols() + sub.cols());
  for (std::size_t i = 0; i < space.rows(); ++i) {
    for (std::size_t j = 0; j < space.cols(); ++j) joined(i, j) = space(i, j);
    for (std::size_t j = 0; j < sub.cols(); ++j) joined(i, space.cols() + j) = sub(i, j);
  }
  return rank(joined) == rank(space);
}

struct Inertia {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;
};

/// Sylvester inertia of a symmetric rational matrix by congruence.
/// A zero pivot with a nonzero off-diagonal entry a_ij is repaired by the
/// substitution e_i <- e_i + e_j, which splits off the hyperbolic pair.
inline Inertia inertia(RationalMatrix a) {
  if (!is_symmetric(a)) throw PreconditionError("form is not symmetric");
  const std::size_t n = a.rows();
  Inertia out;
  std::size_t k = 0;
  for (; k < n; ++k) {
    std::size_t p = k;
    while (p < n && sgn(a(p, p)) == 0) ++p;
    if (p == n) {
      std::optional<std::pair<std::size_t, std::size_t>> off;
      for (std::size_t i = k; i < n && !off; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (sgn(a(i, j)) != 0) {
            off = {i, j};
            break;
          }
      if (!off) break;
      auto [i, j] = *off;
      for (std::size_t c = 0; c < n; ++c) a(i, c) += a(j, c);
      for (std::size_t r = 0; r < n; ++r) a(r, i) += a(r, j);
      p = i;
    }
    a.swap_rows(k, p);
    a.swap_cols(k, p);
    const Rational piv = a(k, k);
    (sgn(piv) > 0 ? out.positive : out.negative) += 1;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (sgn(a(i, k)) == 0) continue;
      const Rational f = a(i, k) / piv;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = k; j < n; ++j) a(j, i) = a(i, j);
    }
  }
  out.zero = n - out.positive - out.negative;
  return out;
}

/// Product of random elementary integer row operations; determinant 1.
template <class Rng>
IntMatrix random_unimodular(Rng& rng, std::size_t n) {
  IntMatrix g = identity_int(n);
  if (n < 2) return g;
  std::uniform_int_distribution<std::size_t> idx(0, n - 1);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (std::size_t t = 0; t < 4 * n; ++t) {
    const std::size_t i = idx(rng), j = idx(rng);
    if (i == j) continue;
    const int c = coef(rng);
    for (std::size_t k = 0; k < n; ++k) g(i, k) += c * g(j, k);
  }
  return g;
}

}  // namespace k3arith::linalg
