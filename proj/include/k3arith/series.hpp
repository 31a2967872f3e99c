#pragma once

// Truncated power series in one and two variables over a coefficient ring.
//
// A coefficient ring R provides `Elem` and the operations zero, one,
// from_int, add, sub, neg, mul, is_zero and inverse (for units). Rings in
// this library: RationalField, ResidueRing (Z/p^m) and WittRing.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/padic.hpp"
#include "k3arith/witt.hpp"

namespace k3arith {

template <class R>
concept CoefficientRing = requires(const R& r, const typename R::Elem& a, std::int64_t n) {
  { r.zero() } -> std::convertible_to<typename R::Elem>;
  { r.one() } -> std::convertible_to<typename R::Elem>;
  { r.from_int(n) } -> std::convertible_to<typename R::Elem>;
  { r.add(a, a) } -> std::convertible_to<typename R::Elem>;
  { r.sub(a, a) } -> std::convertible_to<typename R::Elem>;
  { r.neg(a) } -> std::convertible_to<typename R::Elem>;
  { r.mul(a, a) } -> std::convertible_to<typename R::Elem>;
  { r.is_zero(a) } -> std::convertible_to<bool>;
  { r.inverse(a) } -> std::convertible_to<typename R::Elem>;
};

template <class R>
using Elem_of = typename R::Elem;

/// The field Q, as a coefficient ring.
struct RationalField {
  using Elem = Rational;
  [[nodiscard]] Elem zero() const { return Rational(0); }
  [[nodiscard]] Elem one() const { return Rational(1); }
  [[nodiscard]] Elem from_int(std::int64_t x) const { return Rational(static_cast<long>(x)); }
  [[nodiscard]] Elem add(const Elem& a, const Elem& b) const { return a + b; }
  [[nodiscard]] Elem sub(const Elem& a, const Elem& b) const { return a - b; }
  [[nodiscard]] Elem neg(const Elem& a) const { return -a; }
  [[nodiscard]] Elem mul(const Elem& a, const Elem& b) const { return a * b; }
  [[nodiscard]] bool is_zero(const Elem& a) const { return sgn(a) == 0; }
  [[nodiscard]] Elem inverse(const Elem& a) const {
    if (sgn(a) == 0) throw PreconditionError("zero has no inverse");
    return 1 / a;
  }
  [[nodiscard]] bool is_unit(const Elem& a) const { return sgn(a) != 0; }
  [[nodiscard]] std::string element_string(const Elem& a) const { return a.get_str(); }
  friend bool operator==(const RationalField&, const RationalField&) { return true; }
};

static_assert(CoefficientRing<RationalField>);
static_assert(CoefficientRing<ResidueRing>);
static_assert(CoefficientRing<WittRing>);

/// Univariate series a_0 + a_1 x + ... + a_{N-1} x^{N-1} modulo x^N.
template <CoefficientRing R>
class PowerSeries {
 public:
  using Elem = typename R::Elem;

  PowerSeries(R ring, std::size_t trunc) : ring_(std::move(ring)), c_(trunc, ring_.zero()) {}
  PowerSeries(R ring, std::vector<Elem> coeffs) : ring_(std::move(ring)), c_(std::move(coeffs)) {}

  /// The series x.
  static PowerSeries variable(const R& ring, std::size_t trunc) {
    PowerSeries s(ring, trunc);
    if (trunc > 1) s.c_[1] = ring.one();
    return s;
  }

  [[nodiscard]] const R& ring() const { return ring_; }
  [[nodiscard]] std::size_t trunc() const { return c_.size(); }
  [[nodiscard]] const Elem& operator[](std::size_t i) const { return c_[i]; }
  Elem& operator[](std::size_t i) { return c_[i]; }
  [[nodiscard]] const std::vector<Elem>& coefficients() const { return c_; }

  [[nodiscard]] PowerSeries truncated(std::size_t n) const {
    PowerSeries r(ring_, std::min(n, trunc()));
    for (std::size_t i = 0; i < r.trunc(); ++i) r.c_[i] = c_[i];
    return r;
  }

  /// Least index with a nonzero coefficient, if any.
  [[nodiscard]] std::optional<std::size_t> order() const {
    for (std::size_t i = 0; i < c_.size(); ++i)
      if (!ring_.is_zero(c_[i])) return i;
    return std::nullopt;
  }

  friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    PowerSeries r(a.ring_, std::min(a.trunc(), b.trunc()));
    for (std::size_t i = 0; i < r.trunc(); ++i) r.c_[i] = a.ring_.add(a.c_[i], b.c_[i]);
    return r;
  }
  friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) {
    PowerSeries r(a.ring_, std::min(a.trunc(), b.trunc()));
    for (std::size_t i = 0; i < r.trunc(); ++i) r.c_[i] = a.ring_.sub(a.c_[i], b.c_[i]);
    return r;
  }
  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    const std::size_t n = std::min(a.trunc(), b.trunc());
    PowerSeries r(a.ring_, n);
    const R& ring = a.ring_;
    for (std::size_t i = 0; i < n; ++i) {
      if (ring.is_zero(a.c_[i])) continue;
      for (std::size_t j = 0; i + j < n; ++j) {
        if (ring.is_zero(b.c_[j])) continue;
        r.c_[i + j] = ring.add(r.c_[i + j], ring.mul(a.c_[i], b.c_[j]));
      }
    }
    return r;
  }
  [[nodiscard]] PowerSeries scaled(const Elem& s) const {
    PowerSeries r = *this;
    for (auto& v : r.c_) v = ring_.mul(s, v);
    return r;
  }

  /// d/dx; the result keeps the same truncation, its top coefficient unknown
  /// and set to zero (callers track the one lost degree).
  [[nodiscard]] PowerSeries derivative() const {
    PowerSeries r(ring_, trunc());
    for (std::size_t i = 1; i < trunc(); ++i)
      r.c_[i - 1] = ring_.mul(ring_.from_int(static_cast<std::int64_t>(i)), c_[i]);
    return r;
  }

  /// Multiplicative inverse; the constant term must be a unit.
  [[nodiscard]] PowerSeries reciprocal() const {
    if (c_.empty()) return *this;
    PowerSeries r(ring_, trunc());
    const Elem inv0 = ring_.inverse(c_[0]);
    r.c_[0] = inv0;
    for (std::size_t n = 1; n < trunc(); ++n) {
      Elem acc = ring_.zero();
      for (std::size_t k = 1; k <= n; ++k) {
        if (ring_.is_zero(c_[k])) continue;
        acc = ring_.add(acc, ring_.mul(c_[k], r.c_[n - k]));
      }
      r.c_[n] = ring_.neg(ring_.mul(inv0, acc));
    }
    return r;
  }

  /// this(g(x)) for g(0) = 0, truncated at min of the two truncations.
  [[nodiscard]] PowerSeries compose(const PowerSeries& g) const {
    if (g.trunc() > 0 && !ring_.is_zero(g.c_[0]))
      throw PreconditionError("inner series must have zero constant term");
    const std::size_t n = std::min(trunc(), g.trunc());
    PowerSeries acc(ring_, n);
    for (std::size_t k = n; k-- > 0;) {
      acc = acc * g.truncated(n);
      acc.c_[0] = ring_.add(acc.c_[0], c_[k]);
    }
    return acc;
  }

  friend bool operator==(const PowerSeries& a, const PowerSeries& b) {
    return a.c_ == b.c_;
  }

 private:
  R ring_;
  std::vector<Elem> c_;
};

/// Compositional inverse g with f(g(x)) = x mod x^N. Requires f(0) = 0 and
/// f'(0) a unit. Newton iteration g <- g - (f(g) - x) / f'(g), doubling the
/// number of correct coefficients per pass.
template <CoefficientRing R>
PowerSeries<R> series_reverse(const PowerSeries<R>& f, std::size_t n) {
  const R& ring = f.ring();
  if (n > f.trunc()) throw PreconditionError("requested truncation exceeds input");
  if (n <= 1) return PowerSeries<R>(ring, n);
  if (!ring.is_zero(f[0])) throw PreconditionError("not reversible: f(0) != 0");
  Elem_of<R> inv1;
  try {
    inv1 = ring.inverse(f[1]);
  } catch (const PreconditionError&) {
    throw PreconditionError("not reversible: linear coefficient is not a unit");
  }

  const PowerSeries<R> df_full = f.derivative();
  PowerSeries<R> g(ring, 2);
  g[1] = inv1;
  std::size_t have = 2;  // g correct modulo x^have
  while (have < n) {
    const std::size_t next = std::min(n, 2 * have);
    PowerSeries<R> gn(ring, next);
    for (std::size_t i = 0; i < have; ++i) gn[i] = g[i];
    PowerSeries<R> residual = f.truncated(next).compose(gn);
    residual[1] = ring.sub(residual[1], ring.one());
    PowerSeries<R> slope = df_full.truncated(next).compose(gn);
    g = gn - residual * slope.reciprocal();
    have = next;
  }
  return g;
}

/// Series in x, y modulo the ideal of monomials of total degree >= N.
template <CoefficientRing R>
class BivariateSeries {
 public:
  using Elem = typename R::Elem;

  BivariateSeries(R ring, std::size_t trunc)
      : ring_(std::move(ring)), n_(trunc), c_(trunc * (trunc + 1) / 2, ring_.zero()) {}

  static BivariateSeries x(const R& ring, std::size_t trunc) {
    BivariateSeries s(ring, trunc);
    if (trunc > 1) s.at(1, 0) = ring.one();
    return s;
  }
  static BivariateSeries y(const R& ring, std::size_t trunc) {
    BivariateSeries s(ring, trunc);
    if (trunc > 1) s.at(0, 1) = ring.one();
    return s;
  }

  [[nodiscard]] const R& ring() const { return ring_; }
  [[nodiscard]] std::size_t trunc() const { return n_; }

  static std::size_t index(std::size_t i, std::size_t j) {
    const std::size_t d = i + j;
    return d * (d + 1) / 2 + j;
  }
  Elem& at(std::size_t i, std::size_t j) { return c_[index(i, j)]; }
  [[nodiscard]] const Elem& at(std::size_t i, std::size_t j) const { return c_[index(i, j)]; }

  friend BivariateSeries operator+(const BivariateSeries& a, const BivariateSeries& b) {
    const std::size_t n = std::min(a.n_, b.n_);
    BivariateSeries r(a.ring_, n);
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.ring_.add(a.c_[k], b.c_[k]);
    return r;
  }
  friend BivariateSeries operator-(const BivariateSeries& a, const BivariateSeries& b) {
    const std::size_t n = std::min(a.n_, b.n_);
    BivariateSeries r(a.ring_, n);
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.ring_.sub(a.c_[k], b.c_[k]);
    return r;
  }
  friend BivariateSeries operator*(const BivariateSeries& a, const BivariateSeries& b) {
    const std::size_t n = std::min(a.n_, b.n_);
    const R& ring = a.ring_;
    BivariateSeries r(ring, n);
    // collect the nonzero terms of b once
    std::vector<std::pair<std::size_t, std::size_t>> bterms;
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t j = 0; j <= d; ++j)
        if (!ring.is_zero(b.c_[index(d - j, j)])) bterms.emplace_back(d, j);
    for (std::size_t d1 = 0; d1 < n; ++d1) {
      for (std::size_t j1 = 0; j1 <= d1; ++j1) {
        const Elem& av = a.c_[index(d1 - j1, j1)];
        if (ring.is_zero(av)) continue;
        for (const auto& [d2, j2] : bterms) {
          if (d1 + d2 >= n) break;
          Elem& dst = r.c_[index(d1 + d2 - j1 - j2, j1 + j2)];
          dst = ring.add(dst, ring.mul(av, b.c_[index(d2 - j2, j2)]));
        }
      }
    }
    return r;
  }

  [[nodiscard]] BivariateSeries swapped() const {
    BivariateSeries r(ring_, n_);
    for (std::size_t d = 0; d < n_; ++d)
      for (std::size_t j = 0; j <= d; ++j) r.at(j, d - j) = at(d - j, j);
    return r;
  }

  /// phi(this) for a univariate phi with phi(0) = 0 (Horner's rule).
  [[nodiscard]] BivariateSeries compose_into(const PowerSeries<R>& phi) const {
    if (!ring_.is_zero(at(0, 0)))
      throw PreconditionError("inner series must have zero constant term");
    const std::size_t n = std::min(n_, phi.trunc());
    BivariateSeries self = truncated(n);
    BivariateSeries acc(ring_, n);
    for (std::size_t k = n; k-- > 0;) {
      acc = acc * self;
      acc.at(0, 0) = ring_.add(acc.at(0, 0), phi[k]);
    }
    return acc;
  }

  /// this(u(x), v(y)) for univariate u, v vanishing at 0.
  [[nodiscard]] BivariateSeries substitute(const PowerSeries<R>& u,
                                           const PowerSeries<R>& v) const {
    const std::size_t n = std::min({n_, u.trunc(), v.trunc()});
    const auto upow = powers(u.truncated(n), n);
    const auto vpow = powers(v.truncated(n), n);
    BivariateSeries r(ring_, n);
    for (std::size_t i = 0; i < n; ++i) {
      // Q_i(y) = sum_j c_ij v(y)^j
      std::vector<Elem> q(n - i, ring_.zero());
      for (std::size_t j = 0; i + j < n; ++j) {
        const Elem& c = at(i, j);
        if (ring_.is_zero(c)) continue;
        for (std::size_t b = j; i + b < n; ++b)
          q[b] = ring_.add(q[b], ring_.mul(c, vpow[j][b]));
      }
      for (std::size_t a = i; a < n; ++a) {
        const Elem& ua = upow[i][a];
        if (ring_.is_zero(ua)) continue;
        for (std::size_t b = 0; a + b < n; ++b) {
          if (b >= q.size() || ring_.is_zero(q[b])) continue;
          r.at(a, b) = ring_.add(r.at(a, b), ring_.mul(ua, q[b]));
        }
      }
    }
    return r;
  }

  /// this(x, g(x)) as a univariate series, for g(0) = 0.
  [[nodiscard]] PowerSeries<R> along(const PowerSeries<R>& g) const {
    const std::size_t n = std::min(n_, g.trunc());
    const auto gpow = powers(g.truncated(n), n);
    PowerSeries<R> r(ring_, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; i + j < n; ++j) {
        const Elem& c = at(i, j);
        if (ring_.is_zero(c)) continue;
        for (std::size_t b = j; i + b < n; ++b)
          r[i + b] = ring_.add(r[i + b], ring_.mul(c, gpow[j][b]));
      }
    return r;
  }

  /// this(u(x), v(x)) as a univariate series, for u(0) = v(0) = 0.
  [[nodiscard]] PowerSeries<R> evaluate(const PowerSeries<R>& u, const PowerSeries<R>& v) const {
    const std::size_t n = std::min({n_, u.trunc(), v.trunc()});
    const auto upow = powers(u.truncated(n), n);
    const auto vpow = powers(v.truncated(n), n);
    PowerSeries<R> r(ring_, n);
    for (std::size_t i = 0; i < n; ++i) {
      PowerSeries<R> q(ring_, n);
      bool any = false;
      for (std::size_t j = 0; i + j < n; ++j) {
        const Elem& c = at(i, j);
        if (ring_.is_zero(c)) continue;
        any = true;
        for (std::size_t b = j; b < n; ++b) q[b] = ring_.add(q[b], ring_.mul(c, vpow[j][b]));
      }
      if (any) r = r + upow[i] * q;
    }
    return r;
  }

  [[nodiscard]] BivariateSeries truncated(std::size_t n) const {
    n = std::min(n, n_);
    BivariateSeries r(ring_, n);
    std::copy(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(r.c_.size()), r.c_.begin());
    return r;
  }

  /// First (i, j) in degree order where the two series differ.
  [[nodiscard]] std::optional<std::pair<std::size_t, std::size_t>> first_difference(
      const BivariateSeries& other) const {
    const std::size_t n = std::min(n_, other.n_);
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t j = 0; j <= d; ++j)
        if (!(at(d - j, j) == other.at(d - j, j))) return std::make_pair(d - j, j);
    return std::nullopt;
  }

  friend bool operator==(const BivariateSeries& a, const BivariateSeries& b) {
    return a.n_ == b.n_ && a.c_ == b.c_;
  }

  /// Powers s^0 .. s^{count-1}, each truncated at s.trunc().
  static std::vector<PowerSeries<R>> powers(const PowerSeries<R>& s, std::size_t count) {
    std::vector<PowerSeries<R>> out;
    out.reserve(count);
    PowerSeries<R> one(s.ring(), s.trunc());
    if (s.trunc() > 0) one[0] = s.ring().one();
    out.push_back(one);
    for (std::size_t k = 1; k < count; ++k) out.push_back(out.back() * s);
    return out;
  }

 private:
  R ring_;
  std::size_t n_;
  std::vector<Elem> c_;
};

}  // namespace k3arith
