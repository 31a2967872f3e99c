#pragma once

// Clifford algebra Cl(M) of an even lattice over Q, in the monomial basis
// e_S = e_{s1} e_{s2} ... (s1 < s2 < ...), S encoded as a bitmask.
// Relations: e_i e_j + e_j e_i = (e_i, e_j), e_i^2 = q(e_i) = (e_i, e_i)/2.
//
// Dense operators on Cl are 2^n x 2^n rational matrices and are limited to
// n <= 12. Elements themselves are sparse and work at any rank n <= 62.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/lattice.hpp"
#include "k3arith/linalg.hpp"
#include "k3arith/matrix.hpp"

namespace k3arith {

using RationalVector = std::vector<Rational>;
using EndOperator = RationalMatrix;

inline constexpr std::size_t kMaxDenseCliffordRank = 12;
inline constexpr std::size_t kMaxCliffordRank = 62;

namespace detail {

struct CliffordData {
  std::size_t n = 0;
  RationalMatrix gram;
  std::vector<Rational> q;  // q(e_i)
  mutable std::mutex mutex;
  mutable std::unordered_map<std::uint64_t, std::map<std::uint64_t, Rational>> memo;
};

}  // namespace detail

class CliffordAlgebra;

class CliffordElement {
 public:
  using Coeffs = std::map<std::uint64_t, Rational>;

  CliffordElement() = default;
  CliffordElement(std::shared_ptr<const detail::CliffordData> parent, Coeffs c)
      : parent_(std::move(parent)), c_(std::move(c)) {
    prune();
  }

  [[nodiscard]] const Coeffs& coefficients() const { return c_; }
  [[nodiscard]] Rational coefficient(std::uint64_t mask) const {
    auto it = c_.find(mask);
    return it == c_.end() ? Rational(0) : it->second;
  }
  [[nodiscard]] bool is_zero() const { return c_.empty(); }
  [[nodiscard]] const detail::CliffordData* parent() const { return parent_.get(); }

  [[nodiscard]] bool is_even() const {
    for (const auto& [m, v] : c_)
      if (std::popcount(m) % 2 != 0) return false;
    return true;
  }
  [[nodiscard]] bool is_odd() const {
    for (const auto& [m, v] : c_)
      if (std::popcount(m) % 2 == 0) return false;
    return true;
  }
  [[nodiscard]] bool is_homogeneous() const { return is_even() || is_odd(); }

  friend CliffordElement operator+(const CliffordElement& a, const CliffordElement& b) {
    check_parents(a, b);
    Coeffs c = a.c_;
    for (const auto& [m, v] : b.c_) c[m] += v;
    return {a.parent_ ? a.parent_ : b.parent_, std::move(c)};
  }
  friend CliffordElement operator-(const CliffordElement& a, const CliffordElement& b) {
    check_parents(a, b);
    Coeffs c = a.c_;
    for (const auto& [m, v] : b.c_) c[m] -= v;
    return {a.parent_ ? a.parent_ : b.parent_, std::move(c)};
  }
  [[nodiscard]] CliffordElement scaled(const Rational& s) const {
    Coeffs c;
    if (sgn(s) != 0)
      for (const auto& [m, v] : c_) c[m] = s * v;
    return {parent_, std::move(c)};
  }
  friend CliffordElement operator*(const CliffordElement& a, const CliffordElement& b);

  friend bool operator==(const CliffordElement& a, const CliffordElement& b) {
    return a.c_ == b.c_;
  }

  static void check_parents(const CliffordElement& a, const CliffordElement& b) {
    if (a.parent_ && b.parent_ && a.parent_ != b.parent_)
      throw PreconditionError("elements belong to different Clifford algebras");
  }

 private:
  void prune() {
    for (auto it = c_.begin(); it != c_.end();) it = sgn(it->second) == 0 ? c_.erase(it) : ++it;
  }

  std::shared_ptr<const detail::CliffordData> parent_;
  Coeffs c_;
};

namespace detail {

/// e_j * e_S as a sparse combination of monomials.
inline std::map<std::uint64_t, Rational> lmul_generator_raw(const CliffordData& d, std::size_t j,
                                                            std::uint64_t s) {
  const std::uint64_t bit = std::uint64_t{1} << j;
  if (s == 0 || bit < (s & -s)) return {{s | bit, Rational(1)}};
  const auto s1 = static_cast<std::size_t>(std::countr_zero(s));
  const std::uint64_t rest = s & (s - 1);
  if (s1 == j) {
    if (sgn(d.q[j]) == 0) return {};
    return {{rest, d.q[j]}};
  }
  // j > s1: e_j e_s1 = -e_s1 e_j + (e_j, e_s1)
  std::map<std::uint64_t, Rational> out;
  const std::uint64_t b1 = std::uint64_t{1} << s1;
  for (auto& [m, v] : lmul_generator_raw(d, j, rest)) out[m | b1] -= v;
  if (sgn(d.gram(j, s1)) != 0) out[rest] += d.gram(j, s1);
  for (auto it = out.begin(); it != out.end();) it = sgn(it->second) == 0 ? out.erase(it) : ++it;
  return out;
}

inline std::map<std::uint64_t, Rational> lmul_generator(const CliffordData& d, std::size_t j,
                                                        std::uint64_t s) {
  if (d.n > kMaxDenseCliffordRank) return lmul_generator_raw(d, j, s);
  const std::uint64_t key = (s << 6) | j;
  {
    std::lock_guard lock(d.mutex);
    auto it = d.memo.find(key);
    if (it != d.memo.end()) return it->second;
  }
  auto value = lmul_generator_raw(d, j, s);
  std::lock_guard lock(d.mutex);
  d.memo.emplace(key, value);
  return value;
}

/// e_j * x
inline std::map<std::uint64_t, Rational> lmul_generator(const CliffordData& d, std::size_t j,
                                                        const std::map<std::uint64_t, Rational>& x) {
  std::map<std::uint64_t, Rational> out;
  for (const auto& [s, c] : x)
    for (const auto& [m, v] : lmul_generator(d, j, s)) out[m] += c * v;
  for (auto it = out.begin(); it != out.end();) it = sgn(it->second) == 0 ? out.erase(it) : ++it;
  return out;
}

}  // namespace detail

inline CliffordElement operator*(const CliffordElement& a, const CliffordElement& b) {
  CliffordElement::check_parents(a, b);
  const auto parent = a.parent_ ? a.parent_ : b.parent_;
  if (!parent) return {};
  CliffordElement::Coeffs out;
  for (const auto& [s, ca] : a.c_) {
    auto acc = b.c_;
    // e_{s1} ... e_{sk} * b, innermost factor first
    for (std::size_t k = 64; k-- > 0;)
      if ((s >> k) & 1U) acc = detail::lmul_generator(*parent, k, acc);
    for (const auto& [m, v] : acc) out[m] += ca * v;
  }
  return {parent, std::move(out)};
}

class CliffordAlgebra {
 public:
  explicit CliffordAlgebra(const QuadLattice& lattice) : CliffordAlgebra(to_rational(lattice.gram())) {
    if (!lattice.is_even()) throw PreconditionError("lattice is not even");
  }
  /// Any symmetric rational Gram matrix; q(v) = (v, v)/2.
  explicit CliffordAlgebra(const RationalMatrix& gram) {
    if (!is_symmetric(gram)) throw PreconditionError("Gram matrix is not symmetric");
    if (gram.rows() > kMaxCliffordRank) throw PreconditionError("rank too large");
    auto d = std::make_shared<detail::CliffordData>();
    d->n = gram.rows();
    d->gram = gram;
    for (std::size_t i = 0; i < d->n; ++i) d->q.push_back(gram(i, i) / 2);
    data_ = std::move(d);
  }

  [[nodiscard]] std::size_t rank() const { return data_->n; }
  [[nodiscard]] std::uint64_t dimension() const { return std::uint64_t{1} << data_->n; }
  [[nodiscard]] const RationalMatrix& gram() const { return data_->gram; }

  [[nodiscard]] Rational pair(std::span<const Rational> v, std::span<const Rational> w) const {
    Rational s = 0;
    for (std::size_t i = 0; i < rank(); ++i) {
      if (sgn(v[i]) == 0) continue;
      for (std::size_t j = 0; j < rank(); ++j)
        if (sgn(w[j]) != 0) s += v[i] * gram()(i, j) * w[j];
    }
    return s;
  }
  [[nodiscard]] Rational q(std::span<const Rational> v) const { return pair(v, v) / 2; }

  [[nodiscard]] CliffordElement element(CliffordElement::Coeffs c) const { return {data_, std::move(c)}; }
  [[nodiscard]] CliffordElement scalar(const Rational& x) const { return element({{0, x}}); }
  [[nodiscard]] CliffordElement monomial(std::uint64_t mask) const {
    return element({{mask, Rational(1)}});
  }
  [[nodiscard]] CliffordElement generator(std::size_t j) const {
    return monomial(std::uint64_t{1} << j);
  }
  /// The image of a lattice vector sum_j v_j e_j.
  [[nodiscard]] CliffordElement vector(std::span<const Rational> v) const {
    CliffordElement::Coeffs c;
    for (std::size_t j = 0; j < rank(); ++j)
      if (sgn(v[j]) != 0) c[std::uint64_t{1} << j] = v[j];
    return element(std::move(c));
  }

  [[nodiscard]] CliffordElement mul(const CliffordElement& a, const CliffordElement& b) const {
    check(a);
    check(b);
    return a * b;
  }

  /// Matrix of h -> x h on the monomial basis.
  [[nodiscard]] EndOperator lmul_operator(const CliffordElement& x) const {
    check(x);
    require_dense();
    const auto dim = static_cast<std::size_t>(dimension());
    EndOperator op(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
      const auto prod = x * monomial(s);
      for (const auto& [m, v] : prod.coefficients()) op(m, s) = v;
    }
    return op;
  }

  /// i(v) for a lattice vector, built directly from the generator table.
  [[nodiscard]] EndOperator lmul_operator(std::span<const Rational> v) const {
    require_dense();
    if (v.size() != rank()) throw PreconditionError("vector length must equal rank");
    const auto dim = static_cast<std::size_t>(dimension());
    EndOperator op(dim, dim);
    for (std::size_t j = 0; j < rank(); ++j) {
      if (sgn(v[j]) == 0) continue;
      for (std::size_t s = 0; s < dim; ++s)
        for (const auto& [m, c] : detail::lmul_generator(*data_, j, s)) op(m, s) += v[j] * c;
    }
    return op;
  }

  /// Matrix of h -> h x.
  [[nodiscard]] EndOperator rmul_operator(const CliffordElement& x) const {
    check(x);
    require_dense();
    const auto dim = static_cast<std::size_t>(dimension());
    EndOperator op(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
      const auto prod = monomial(s) * x;
      for (const auto& [m, v] : prod.coefficients()) op(m, s) = v;
    }
    return op;
  }

  /// Projection onto Cl+ (sign = +1) or Cl- (sign = -1).
  [[nodiscard]] EndOperator parity_projector(int sign) const {
    require_dense();
    const auto dim = static_cast<std::size_t>(dimension());
    EndOperator op(dim, dim);
    for (std::size_t s = 0; s < dim; ++s)
      if ((std::popcount(s) % 2 == 0) == (sign > 0)) op(s, s) = 1;
    return op;
  }

  [[nodiscard]] std::optional<CliffordElement> inverse(const CliffordElement& g) const {
    const auto dim = static_cast<std::size_t>(dimension());
    RationalVector one(dim, Rational(0));
    one[0] = 1;
    auto x = linalg::solve(lmul_operator(g), one);
    if (!x) return std::nullopt;
    CliffordElement::Coeffs c;
    for (std::size_t s = 0; s < dim; ++s)
      if (sgn((*x)[s]) != 0) c[s] = (*x)[s];
    return element(std::move(c));
  }

  void require_dense() const {
    if (rank() > kMaxDenseCliffordRank)
      throw PreconditionError("rank too large for dense operator");
  }

  [[nodiscard]] const std::shared_ptr<const detail::CliffordData>& data() const { return data_; }

 private:
  void check(const CliffordElement& x) const {
    if (x.parent() != nullptr && x.parent() != data_.get())
      throw PreconditionError("element belongs to a different Clifford algebra");
  }

  std::shared_ptr<const detail::CliffordData> data_;
};

inline CliffordElement cl_mul(const CliffordElement& a, const CliffordElement& b) { return a * b; }

/// [g1, g2] = 2^{-(n-1)} Tr(g1 g2) on an algebra of dimension 2^n.
inline Rational trace_pair(const EndOperator& g1, const EndOperator& g2) {
  const std::size_t dim = g1.rows();
  if (!g1.is_square() || !g2.is_square() || g2.rows() != dim)
    throw PreconditionError("dimension mismatch");
  if (dim < 2 || !std::has_single_bit(dim)) throw PreconditionError("dimension must be 2^n, n >= 1");
  Rational tr = 0;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (sgn(g1(i, j)) != 0 && sgn(g2(j, i)) != 0) tr += g1(i, j) * g2(j, i);
  Rational scale(1, 1);
  mpz_mul_2exp(scale.get_den_mpz_t(), scale.get_den_mpz_t(), std::countr_zero(dim) - 1);
  return tr * scale;
}

/// Column-wise orthogonal basis of span(cols) for the form `gram`; fails if
/// the restricted form is degenerate.
inline RationalMatrix orthogonal_basis(RationalMatrix cols, const RationalMatrix& gram) {
  const std::size_t k = cols.cols();
  RationalMatrix g = cols.transpose() * gram * cols;
  auto add_col = [&](std::size_t dst, std::size_t src, const Rational& f) {
    for (std::size_t r = 0; r < cols.rows(); ++r) cols(r, dst) += f * cols(r, src);
    for (std::size_t c = 0; c < k; ++c) g(dst, c) += f * g(src, c);
    for (std::size_t r = 0; r < k; ++r) g(r, dst) += f * g(r, src);
  };
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t piv = i;
    while (piv < k && sgn(g(piv, piv)) == 0) ++piv;
    if (piv == k) {
      std::optional<std::pair<std::size_t, std::size_t>> off;
      for (std::size_t a = i; a < k && !off; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
          if (sgn(g(a, b)) != 0) {
            off = {a, b};
            break;
          }
      if (!off) throw PreconditionError("degenerate form");
      add_col(off->first, off->second, Rational(1));
      piv = off->first;
    }
    cols.swap_cols(i, piv);
    g.swap_rows(i, piv);
    g.swap_cols(i, piv);
    for (std::size_t j = i + 1; j < k; ++j)
      if (sgn(g(i, j)) != 0) add_col(j, i, -g(i, j) / g(i, i));
  }
  return cols;
}

/// The idempotent pi on End(Cl) with image i(M_Q), orthogonal for [,]:
/// pi(g) = sum_j [g, i(w_j*)] i(w_j) with w_j* the dual basis.
class Projector {
 public:
  explicit Projector(const CliffordAlgebra& alg) : alg_(alg) {
    alg.require_dense();
    const std::size_t n = alg.rank();
    auto ginv = linalg::inverse(alg.gram());
    if (!ginv) throw PreconditionError("degenerate form");
    ginv_ = *ginv;
    for (std::size_t j = 0; j < n; ++j) {
      RationalVector ej(n, Rational(0));
      ej[j] = 1;
      basis_ops_.push_back(alg.lmul_operator(ej));
      dual_ops_.push_back(alg.lmul_operator(ginv_.column(j)));
    }
  }

  [[nodiscard]] const CliffordAlgebra& algebra() const { return alg_; }
  [[nodiscard]] const std::vector<EndOperator>& basis_operators() const { return basis_ops_; }
  [[nodiscard]] const std::vector<EndOperator>& dual_operators() const { return dual_ops_; }

  /// Coordinates of pi(g) in the basis i(e_1), ..., i(e_n).
  [[nodiscard]] RationalVector coefficients(const EndOperator& g) const {
    RationalVector c;
    for (const auto& d : dual_ops_) c.push_back(trace_pair(g, d));
    return c;
  }

  [[nodiscard]] EndOperator apply(const EndOperator& g) const {
    return alg_.lmul_operator(coefficients(g));
  }

  /// The same map through a hyperbolic basis {e, f, v_3, ...}:
  /// pi(g) = [g, i(f)] i(e) + [g, i(e)] i(f) + sum_j [g, i(v_j)] i(v_j) / (v_j, v_j).
  [[nodiscard]] EndOperator apply_hyperbolic(const EndOperator& g) const {
    const auto& hb = hyperbolic_basis();
    const std::size_t n = alg_.rank();
    RationalVector total(n, Rational(0));
    auto accumulate = [&](const RationalVector& v, const Rational& c) {
      for (std::size_t k = 0; k < n; ++k) total[k] += c * v[k];
    };
    const RationalVector e = hb.column(0), f = hb.column(1);
    accumulate(e, trace_pair(g, alg_.lmul_operator(f)));
    accumulate(f, trace_pair(g, alg_.lmul_operator(e)));
    for (std::size_t j = 2; j < n; ++j) {
      const RationalVector v = hb.column(j);
      accumulate(v, trace_pair(g, alg_.lmul_operator(v)) / alg_.pair(v, v));
    }
    return alg_.lmul_operator(total);
  }

  /// Columns e, f, v_3, ..., v_n: (e, f) = 1, q(e) = q(f) = 0, v_j orthogonal
  /// to each other and to e, f.
  [[nodiscard]] const RationalMatrix& hyperbolic_basis() const {
    std::call_once(hyper_once_, [this] { hyper_ = build_hyperbolic_basis(); });
    if (!hyper_) throw PreconditionError("no hyperbolic pair");
    return *hyper_;
  }

  /// Least k >= 0 with p^k pi integral on End of the integral monomial lattice.
  /// pi(E_ab) = sum_j 2^{-(n-1)} i(w_j*)[b][a] i(e_j), and the i(e_j) are
  /// integral with the coefficient recoverable from the column of 1.
  [[nodiscard]] long integrality_exponent(std::uint64_t p) const {
    require_prime(p);
    long k = 0;
    Rational scale(1, 1);
    mpz_mul_2exp(scale.get_den_mpz_t(), scale.get_den_mpz_t(), alg_.rank() - 1);
    for (const auto& d : dual_ops_)
      for (const auto& x : d.data())
        if (sgn(x) != 0) k = std::max(k, -valuation(Rational(x * scale), p));
    return k;
  }

 private:
  [[nodiscard]] std::optional<RationalMatrix> build_hyperbolic_basis() const {
    const std::size_t n = alg_.rank();
    const RationalMatrix& gram = alg_.gram();
    auto unit = [n](std::size_t i) {
      RationalVector v(n, Rational(0));
      v[i] = 1;
      return v;
    };
    std::optional<RationalVector> e;
    for (std::size_t i = 0; i < n && !e; ++i)
      if (sgn(gram(i, i)) == 0) e = unit(i);
    for (std::size_t i = 0; i < n && !e; ++i)
      for (std::size_t j = i + 1; j < n && !e; ++j)
        for (int s : {1, -1}) {
          RationalVector v = unit(i);
          v[j] = s;
          if (sgn(alg_.pair(v, v)) == 0) {
            e = v;
            break;
          }
        }
    if (!e) return std::nullopt;
    RationalVector f;
    for (std::size_t i = 0; i < n; ++i) {
      RationalVector b = unit(i);
      const Rational ef = alg_.pair(*e, b);
      if (sgn(ef) == 0) continue;
      for (auto& x : b) x /= ef;
      const Rational qb = alg_.q(b);
      for (std::size_t k = 0; k < n; ++k) b[k] -= qb * (*e)[k];
      f = b;
      break;
    }
    if (f.empty()) return std::nullopt;
    RationalMatrix rest(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      RationalVector b = unit(i);
      const Rational bf = alg_.pair(b, f), be = alg_.pair(b, *e);
      for (std::size_t k = 0; k < n; ++k) rest(k, i) = b[k] - bf * (*e)[k] - be * f[k];
    }
    const RationalMatrix perp = orthogonal_basis(linalg::column_space(rest), gram);
    RationalMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      out(k, 0) = (*e)[k];
      out(k, 1) = f[k];
      for (std::size_t j = 0; j < perp.cols(); ++j) out(k, 2 + j) = perp(k, j);
    }
    return out;
  }

  CliffordAlgebra alg_;
  RationalMatrix ginv_;
  std::vector<EndOperator> basis_ops_;
  std::vector<EndOperator> dual_ops_;
  mutable std::once_flag hyper_once_;
  mutable std::optional<RationalMatrix> hyper_;
};

inline Projector projector_pi(const CliffordAlgebra& alg) { return Projector(alg); }

/// Property check of pi on random operators: pi fixes i(M), is idempotent,
/// g - pi(g) is [,]-orthogonal to i(M), i is injective, and (when M has a
/// hyperbolic pair) the hyperbolic formula agrees.
struct ProjectorReport {
  bool fixes_vectors = true;
  bool idempotent = true;
  bool kernel_orthogonal = true;
  bool image_rank = true;
  std::optional<bool> hyperbolic_agrees;
  std::vector<std::string> witnesses;
  [[nodiscard]] bool passed() const {
    return fixes_vectors && idempotent && kernel_orthogonal && image_rank &&
           hyperbolic_agrees.value_or(true);
  }
};

template <class Rng>
EndOperator random_operator(const CliffordAlgebra& alg, Rng& rng) {
  const std::size_t n = alg.rank();
  const auto dim = static_cast<std::size_t>(alg.dimension());
  std::uniform_int_distribution<int> small(-3, 3);
  std::uniform_int_distribution<std::size_t> idx(0, dim - 1);
  auto vec = [&] {
    RationalVector v(n);
    for (auto& x : v) x = small(rng);
    return alg.vector(v);
  };
  EndOperator g = alg.lmul_operator(vec() * vec() + vec()) + alg.rmul_operator(vec());
  for (std::size_t k = 0; k < 2 * n; ++k) g(idx(rng), idx(rng)) += small(rng);
  return g;
}

template <class Rng>
ProjectorReport check_projector(const Projector& pi, Rng& rng, int trials) {
  const CliffordAlgebra& alg = pi.algebra();
  const std::size_t n = alg.rank();
  ProjectorReport rep;
  for (std::size_t j = 0; j < n; ++j)
    if (!(pi.apply(pi.basis_operators()[j]) == pi.basis_operators()[j])) {
      rep.fixes_vectors = false;
      rep.witnesses.push_back("pi(i(e_" + std::to_string(j) + ")) != i(e_" + std::to_string(j) + ")");
    }
  const auto dim = static_cast<std::size_t>(alg.dimension());
  RationalMatrix stacked(dim * dim, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < dim * dim; ++k) stacked(k, j) = pi.basis_operators()[j].data()[k];
  if (linalg::rank(stacked) != n) {
    rep.image_rank = false;
    rep.witnesses.push_back("i(M) has dimension below rank");
  }
  bool hyper = true;
  try {
    (void)pi.hyperbolic_basis();
  } catch (const PreconditionError&) {
    hyper = false;
  }
  if (hyper) rep.hyperbolic_agrees = true;
  for (int t = 0; t < trials; ++t) {
    const auto g = random_operator(alg, rng);
    const auto pg = pi.apply(g);
    if (!(pi.apply(pg) == pg)) {
      rep.idempotent = false;
      rep.witnesses.push_back("pi(pi(g)) != pi(g) in trial " + std::to_string(t));
    }
    const EndOperator k = g - pg;
    for (std::size_t j = 0; j < n; ++j)
      if (sgn(trace_pair(k, pi.basis_operators()[j])) != 0) {
        rep.kernel_orthogonal = false;
        rep.witnesses.push_back("[g - pi(g), i(e_" + std::to_string(j) + ")] != 0 in trial " +
                                std::to_string(t));
      }
    if (hyper && !(pi.apply_hyperbolic(g) == pg)) {
      rep.hyperbolic_agrees = false;
      rep.witnesses.push_back("hyperbolic formula differs in trial " + std::to_string(t));
    }
  }
  return rep;
}

/// Decreasing filtration: Fil^i is the whole space for i <= lowest, steps[i -
/// lowest] in the listed range, and 0 above it. Subspaces are column bases.
struct Filtration {
  int lowest = 0;
  std::size_t ambient = 0;
  std::vector<RationalMatrix> steps;

  [[nodiscard]] RationalMatrix at(int i) const {
    if (i <= lowest) return steps.front();
    const auto k = static_cast<std::size_t>(i - lowest);
    if (k < steps.size()) return steps[k];
    return RationalMatrix(ambient, 0);
  }
};

struct IsotropicFiltrations {
  Filtration on_lattice;   // Fil^1 = <e>, Fil^0 = e^perp
  Filtration on_clifford;  // Fil^0 = i(e) Cl
};

inline void require_isotropic(const CliffordAlgebra& alg, std::span<const Rational> e) {
  if (e.size() != alg.rank()) throw PreconditionError("vector length must equal rank");
  bool zero = true;
  for (const auto& x : e) zero = zero && sgn(x) == 0;
  if (zero) throw PreconditionError("zero vector");
  if (sgn(alg.q(e)) != 0) throw PreconditionError("not isotropic");
  if (linalg::rank(alg.gram()) < alg.rank()) throw PreconditionError("degenerate form");
}

inline IsotropicFiltrations isotropic_filtration(const CliffordAlgebra& alg,
                                                 std::span<const Rational> e) {
  require_isotropic(alg, e);
  alg.require_dense();
  const std::size_t n = alg.rank();
  RationalMatrix line(n, 1);
  for (std::size_t k = 0; k < n; ++k) line(k, 0) = e[k];
  RationalMatrix functional(1, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) functional(0, j) += e[k] * alg.gram()(k, j);
  Filtration fm{-1, n, {identity_rational(n), linalg::nullspace(functional), line}};
  const auto dim = static_cast<std::size_t>(alg.dimension());
  Filtration fh{-1, dim, {identity_rational(dim), linalg::column_space(alg.lmul_operator(e))}};
  return {std::move(fm), std::move(fh)};
}

/// Filtration on End(Cl) induced by {0 = Fil^1 ⊂ I = Fil^0 ⊂ Cl}, tested in a
/// basis B = [basis of I | complement]: with T = B^-1 g B and d = dim I,
///   Fil^0: T[d:, :d] = 0;  Fil^1: T[d:, :] = 0 and T[:, :d] = 0;  Fil^2 = 0.
class EndFiltration {
 public:
  explicit EndFiltration(const RationalMatrix& image) : d_(image.cols()) {
    const std::size_t n = image.rows();
    RationalMatrix joined(n, d_ + n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d_; ++j) joined(i, j) = image(i, j);
      joined(i, d_ + i) = 1;
    }
    basis_ = linalg::column_space(joined);
    inverse_ = *linalg::inverse(basis_);
  }

  [[nodiscard]] std::size_t image_dimension() const { return d_; }
  [[nodiscard]] const RationalMatrix& basis() const { return basis_; }
  [[nodiscard]] RationalMatrix adapted(const EndOperator& g) const { return inverse_ * g * basis_; }

  /// Whether entry (r, c) of an adapted matrix may be nonzero in Fil^k.
  [[nodiscard]] bool allowed(int k, std::size_t r, std::size_t c) const {
    if (k <= -1) return true;
    if (k == 0) return !(r >= d_ && c < d_);
    if (k == 1) return r < d_ && c >= d_;
    return false;
  }

  [[nodiscard]] bool contains(int k, const EndOperator& g) const {
    const RationalMatrix t = adapted(g);
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c)
        if (sgn(t(r, c)) != 0 && !allowed(k, r, c)) return false;
    return true;
  }

 private:
  std::size_t d_;
  RationalMatrix basis_;
  RationalMatrix inverse_;
};

struct FiltrationReport {
  bool lattice_to_operators = true;  // i(Fil^k M) ⊆ Fil^k End
  bool parity = true;                // p+ and p- preserve Fil H
  bool right_action = true;          // r_b preserves Fil H
  bool projector = true;             // pi(Fil^k End) ⊆ Fil^k End
  std::vector<std::string> witnesses;
  [[nodiscard]] bool passed() const {
    return lattice_to_operators && parity && right_action && projector;
  }
};

inline FiltrationReport filtration_compatibility_check(const CliffordAlgebra& alg,
                                                       std::span<const Rational> e) {
  const auto fil = isotropic_filtration(alg, e);
  const std::size_t n = alg.rank();
  const auto dim = static_cast<std::size_t>(alg.dimension());
  const RationalMatrix image = fil.on_clifford.at(0);
  const EndFiltration end(image);
  FiltrationReport rep;

  for (int k = -1; k <= 2; ++k) {
    const RationalMatrix sub = fil.on_lattice.at(k);
    for (std::size_t c = 0; c < sub.cols(); ++c)
      if (!end.contains(k, alg.lmul_operator(sub.column(c)))) {
        rep.lattice_to_operators = false;
        rep.witnesses.push_back("i(v) leaves Fil^" + std::to_string(k) + " for basis vector " +
                                std::to_string(c) + " of Fil^" + std::to_string(k) + "(M)");
      }
  }

  for (int sign : {1, -1})
    if (!linalg::columns_in_span(alg.parity_projector(sign) * image, image)) {
      rep.parity = false;
      rep.witnesses.push_back(std::string("parity projector ") + (sign > 0 ? "p+" : "p-") +
                              " moves Fil^0(H)");
    }

  for (std::size_t b = 0; b < dim; ++b)
    if (!linalg::columns_in_span(alg.rmul_operator(alg.monomial(b)) * image, image)) {
      rep.right_action = false;
      rep.witnesses.push_back("right multiplication by monomial " + std::to_string(b) +
                              " moves Fil^0(H)");
    }

  // pi(g) = sum_j c_j(g) i(e_j) with c_j(g) = [g, i(w_j*)]. For the spanning
  // set g = B E_ab B^-1 of Fil^k End, c_j = 2^{-(n-1)} (B^-1 i(w_j*) B)[b][a];
  // these vectors must lie in S_k = {c : i(sum c_j e_j) in Fil^k End}.
  const Projector pi(alg);
  std::vector<RationalMatrix> dual_adapted, basis_adapted;
  for (std::size_t j = 0; j < n; ++j) {
    dual_adapted.push_back(end.adapted(pi.dual_operators()[j]));
    basis_adapted.push_back(end.adapted(pi.basis_operators()[j]));
  }
  Rational scale(1, 1);
  mpz_mul_2exp(scale.get_den_mpz_t(), scale.get_den_mpz_t(), n - 1);
  for (int k = 0; k <= 2; ++k) {
    std::vector<RationalVector> forbidden_rows;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) {
        if (end.allowed(k, r, c)) continue;
        RationalVector row(n);
        bool nonzero = false;
        for (std::size_t j = 0; j < n; ++j) {
          row[j] = basis_adapted[j](r, c);
          nonzero = nonzero || sgn(row[j]) != 0;
        }
        if (nonzero) forbidden_rows.push_back(std::move(row));
      }
    RationalMatrix constraints(forbidden_rows.size(), n);
    for (std::size_t r = 0; r < forbidden_rows.size(); ++r)
      for (std::size_t j = 0; j < n; ++j) constraints(r, j) = forbidden_rows[r][j];
    const RationalMatrix allowed_coeffs =
        forbidden_rows.empty() ? identity_rational(n) : linalg::nullspace(constraints);
    std::vector<RationalVector> images;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) {
        if (!end.allowed(k, a, b)) continue;
        RationalVector c(n);
        bool nonzero = false;
        for (std::size_t j = 0; j < n; ++j) {
          c[j] = scale * dual_adapted[j](b, a);
          nonzero = nonzero || sgn(c[j]) != 0;
        }
        if (nonzero) images.push_back(std::move(c));
      }
    RationalMatrix cm(n, images.size());
    for (std::size_t t = 0; t < images.size(); ++t)
      for (std::size_t j = 0; j < n; ++j) cm(j, t) = images[t][j];
    if (!linalg::columns_in_span(cm, allowed_coeffs)) {
      rep.projector = false;
      rep.witnesses.push_back("pi moves Fil^" + std::to_string(k) + "(End H)");
    }
  }
  return rep;
}

/// dim i(e) Cl at any rank n <= 62, without dense operators: e is moved to
/// the first position of a rational basis, where e * e_T is +e_{T+{0}} for
/// 0 not in T and 0 otherwise. Every product is computed by the
/// multiplication rule and checked; the count of distinct images is returned.
inline std::uint64_t structural_filtration_dimension(const RationalMatrix& gram,
                                                     std::span<const Rational> e) {
  const std::size_t n = gram.rows();
  if (e.size() != n) throw PreconditionError("vector length must equal rank");
  std::optional<std::size_t> pivot;
  for (std::size_t k = 0; k < n && !pivot; ++k)
    if (sgn(e[k]) != 0) pivot = k;
  if (!pivot) throw PreconditionError("zero vector");
  RationalMatrix basis = identity_rational(n);  // columns: e, then the other unit vectors
  std::size_t col = 1;
  for (std::size_t k = 0; k < n; ++k) {
    basis(k, 0) = e[k];
    if (k != *pivot) {
      for (std::size_t r = 0; r < n; ++r) basis(r, col) = (r == k) ? 1 : 0;
      ++col;
    }
  }
  const CliffordAlgebra adapted(basis.transpose() * gram * basis);
  RationalVector e0(n, Rational(0));
  e0[0] = 1;
  if (sgn(adapted.q(e0)) != 0) throw PreconditionError("not isotropic");
  const auto& data = *adapted.data();
  std::uint64_t count = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t t = 0; t < total; ++t) {
    const auto prod = detail::lmul_generator_raw(data, 0, t);
    if (t & 1U) {
      if (!prod.empty()) throw std::logic_error("e * e_T nonzero although e^2 = 0");
      continue;
    }
    if (prod.size() != 1 || prod.begin()->first != (t | 1U) || prod.begin()->second != 1)
      throw std::logic_error("e * e_T is not the monomial e_{T+e}");
    ++count;
  }
  return count;
}

struct GSpinVerdict {
  bool member = false;
  std::string reason;
  /// Columns: coordinates of g e_j g^-1 in the lattice basis (when member).
  RationalMatrix action;
};

inline GSpinVerdict gspin_membership(const CliffordAlgebra& alg, const CliffordElement& g) {
  alg.require_dense();
  GSpinVerdict v;
  if (g.is_zero()) {
    v.reason = "zero element is not invertible";
    return v;
  }
  if (!g.is_even()) {
    v.reason = "element is not even";
    return v;
  }
  const auto inv = alg.inverse(g);
  if (!inv) {
    v.reason = "element is not invertible";
    return v;
  }
  const std::size_t n = alg.rank();
  v.action = RationalMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto conj = g * alg.generator(j) * (*inv);
    for (const auto& [m, c] : conj.coefficients()) {
      if (std::popcount(m) != 1) {
        v.reason = "conjugate of basis vector " + std::to_string(j) + " leaves M";
        v.action = RationalMatrix();
        return v;
      }
      v.action(static_cast<std::size_t>(std::countr_zero(m)), j) = c;
    }
  }
  v.member = true;
  return v;
}

}  // namespace k3arith
