#pragma once

// F-crystals over W_m(F_{p^a}): a free module with a sigma-semilinear
// Frobenius, F(e_j) = sum_i F_ij e_i. Newton polygons come from the
// characteristic polynomial of F sigma(F) ... sigma^{a-1}(F); Hodge polygons
// from the elementary divisors of F.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/matrix.hpp"
#include "k3arith/padic.hpp"
#include "k3arith/witt.hpp"

namespace k3arith {

/// Convex polygon from (0, 0) given by ascending slopes with multiplicities.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(const std::map<Rational, long>& slopes) {
    for (const auto& [s, m] : slopes) {
      if (m < 0) throw PreconditionError("negative multiplicity");
      if (m > 0) slopes_.emplace_back(s, m);
    }
  }

  [[nodiscard]] const std::vector<std::pair<Rational, long>>& slopes() const { return slopes_; }
  [[nodiscard]] std::map<Rational, long> as_map() const { return {slopes_.begin(), slopes_.end()}; }

  [[nodiscard]] long length() const {
    long n = 0;
    for (const auto& [s, m] : slopes_) n += m;
    return n;
  }

  /// (0, 0) followed by the end of each segment.
  [[nodiscard]] std::vector<std::pair<long, Rational>> vertices() const {
    std::vector<std::pair<long, Rational>> v{{0, Rational(0)}};
    for (const auto& [s, m] : slopes_) v.emplace_back(v.back().first + m, v.back().second + s * m);
    return v;
  }

  [[nodiscard]] Rational value_at(long x) const {
    if (x < 0 || x > length()) throw PreconditionError("abscissa outside the polygon");
    Rational y = 0;
    long at = 0;
    for (const auto& [s, m] : slopes_) {
      const long step = std::min(m, x - at);
      if (step <= 0) break;
      y += s * step;
      at += step;
    }
    return y;
  }

  [[nodiscard]] Rational total() const { return value_at(length()); }

  [[nodiscard]] Polygon shifted(const Rational& d) const {
    std::map<Rational, long> m;
    for (const auto& [s, k] : slopes_) m[s + d] += k;
    return Polygon(m);
  }

  /// Multiset union of slopes.
  [[nodiscard]] Polygon joined(const Polygon& other) const {
    auto m = as_map();
    for (const auto& [s, k] : other.slopes_) m[s] += k;
    return Polygon(m);
  }

  /// "{2/3:3, 1:16, 4/3:3}"
  [[nodiscard]] std::string str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < slopes_.size(); ++i) {
      if (i) out += ", ";
      out += slopes_[i].first.get_str() + ":" + std::to_string(slopes_[i].second);
    }
    return out + "}";
  }

  friend bool operator==(const Polygon& a, const Polygon& b) { return a.slopes_ == b.slopes_; }

 private:
  std::vector<std::pair<Rational, long>> slopes_;
};

namespace detail {

/// BigWittRing with the coefficient accessors used by the generic routines.
class WittRingView : public BigWittRing {
 public:
  using BigWittRing::BigWittRing;
  [[nodiscard]] std::vector<Integer> coefficients(const Elem& x) const { return x; }
};

template <class R>
using RMatrix = Matrix<typename R::Elem>;

template <class R>
RMatrix<R> ring_mul(const R& ring, const RMatrix<R>& a, const RMatrix<R>& b) {
  RMatrix<R> c(a.rows(), b.cols(), ring.zero());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (ring.is_zero(a(i, k))) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (!ring.is_zero(b(k, j))) c(i, j) = ring.add(c(i, j), ring.mul(a(i, k), b(k, j)));
    }
  return c;
}

template <class R>
RMatrix<R> ring_frobenius(const R& ring, RMatrix<R> a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = ring.frobenius(a(i, j));
  return a;
}

/// Coefficients of det(t - A), leading coefficient first (Berkowitz; no division).
template <class R>
std::vector<typename R::Elem> charpoly(const R& ring, const RMatrix<R>& a) {
  using E = typename R::Elem;
  const std::size_t n = a.rows();
  std::vector<E> vect{ring.one()};
  if (n == 0) return vect;
  vect.push_back(ring.neg(a(0, 0)));
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<E> q{ring.one(), ring.neg(a(k, k))};
    std::vector<E> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = a(i, k);
    for (std::size_t j = 0; j < k; ++j) {
      E dot = ring.zero();
      for (std::size_t i = 0; i < k; ++i) dot = ring.add(dot, ring.mul(a(k, i), x[i]));
      q.push_back(ring.neg(dot));
      if (j + 1 == k) break;
      std::vector<E> y(k, ring.zero());
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c)
          if (!ring.is_zero(a(r, c)) && !ring.is_zero(x[c]))
            y[r] = ring.add(y[r], ring.mul(a(r, c), x[c]));
      x = std::move(y);
    }
    std::vector<E> next(k + 2, ring.zero());
    for (std::size_t i = 0; i < k + 2; ++i)
      for (std::size_t j = 0; j <= std::min(i, k); ++j)
        if (i - j < q.size()) next[i] = ring.add(next[i], ring.mul(q[i - j], vect[j]));
    vect = std::move(next);
  }
  return vect;
}

struct LocalSmith {
  std::vector<Valuation> valuations;  // ascending
  std::optional<Matrix<Integer>> left;          // U with U A V = D (when tracked)
  std::optional<Matrix<Integer>> left_inverse;  // U^-1
};

/// Elementary divisor valuations over the truncated local ring. With
/// `track` (a = 1 only) also returns the left transform and its inverse.
template <class R>
LocalSmith local_smith(const R& ring, RMatrix<R> a, bool track = false) {
  using E = typename R::Elem;
  const std::size_t rows = a.rows(), cols = a.cols();
  RMatrix<R> u, uinv;
  if (track) {
    u = RMatrix<R>::identity(rows, ring.zero(), ring.one());
    uinv = u;
  }
  LocalSmith out;
  const std::size_t steps = std::min(rows, cols);
  for (std::size_t t = 0; t < steps; ++t) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    long best_v = 0;
    for (std::size_t i = t; i < rows; ++i)
      for (std::size_t j = t; j < cols; ++j) {
        const Valuation v = ring.valuation(a(i, j));
        if (v.exact && (!best || v.value < best_v)) {
          best = {i, j};
          best_v = v.value;
        }
      }
    if (!best) {
      for (; t < steps; ++t) out.valuations.push_back({ring.precision(), false});
      break;
    }
    a.swap_rows(t, best->first);
    a.swap_cols(t, best->second);
    if (track) {
      u.swap_rows(t, best->first);
      uinv.swap_cols(t, best->first);
    }
    const E unit_inv = ring.inverse(ring.divide_by_p_power(a(t, t), best_v));
    for (std::size_t i = t + 1; i < rows; ++i) {
      if (ring.is_zero(a(i, t))) continue;
      const E c = ring.mul(ring.divide_by_p_power(a(i, t), best_v), unit_inv);
      for (std::size_t j = t; j < cols; ++j) a(i, j) = ring.sub(a(i, j), ring.mul(c, a(t, j)));
      if (track) {
        for (std::size_t j = 0; j < rows; ++j) u(i, j) = ring.sub(u(i, j), ring.mul(c, u(t, j)));
        for (std::size_t r = 0; r < rows; ++r)
          uinv(r, t) = ring.add(uinv(r, t), ring.mul(c, uinv(r, i)));
      }
    }
    for (std::size_t j = t + 1; j < cols; ++j) {
      if (ring.is_zero(a(t, j))) continue;
      const E c = ring.mul(ring.divide_by_p_power(a(t, j), best_v), unit_inv);
      for (std::size_t i = t; i < rows; ++i) a(i, j) = ring.sub(a(i, j), ring.mul(c, a(i, t)));
    }
    out.valuations.push_back({best_v, true});
  }
  if constexpr (std::is_same_v<E, Integer>) {
    if (track) {
      out.left = std::move(u);
      out.left_inverse = std::move(uinv);
    }
  }
  return out;
}

/// Gauss-Jordan inverse over the truncated local ring; nullopt when the
/// reduction mod p is singular.
template <class R>
std::optional<RMatrix<R>> local_inverse(const R& ring, RMatrix<R> a) {
  const std::size_t n = a.rows();
  RMatrix<R> inv = RMatrix<R>::identity(n, ring.zero(), ring.one());
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && !ring.is_unit(a(p, c))) ++p;
    if (p == n) return std::nullopt;
    a.swap_rows(c, p);
    inv.swap_rows(c, p);
    const auto s = ring.inverse(a(c, c));
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) = ring.mul(s, a(c, j));
      inv(c, j) = ring.mul(s, inv(c, j));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || ring.is_zero(a(i, c))) continue;
      const auto f = a(i, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) = ring.sub(a(i, j), ring.mul(f, a(c, j)));
        inv(i, j) = ring.sub(inv(i, j), ring.mul(f, inv(c, j)));
      }
    }
  }
  return inv;
}

}  // namespace detail

class FCrystal {
 public:
  using Entry = std::vector<Integer>;  // coefficients in Z/p^m [t]/(Phi), length a

  FCrystal(std::uint64_t p, int a, int precision, Matrix<Entry> frobenius)
      : p_(p), a_(a), m_(precision), f_(std::move(frobenius)) {
    require_prime(p);
    if (a < 1 || a > kMaxResidueDegree) throw PreconditionError("residue degree out of range");
    if (precision < 1) throw PreconditionError("precision must be positive");
    if (!f_.is_square()) throw PreconditionError("Frobenius matrix must be square");
    const Integer mod = ipow(p, static_cast<unsigned long>(precision));
    for (std::size_t i = 0; i < f_.rows(); ++i)
      for (std::size_t j = 0; j < f_.cols(); ++j) {
        auto& e = f_(i, j);
        if (static_cast<int>(e.size()) > a) throw PreconditionError("too many Witt coefficients");
        e.resize(static_cast<std::size_t>(a), Integer(0));
        for (auto& c : e) c = mod_floor(c, mod);
      }
  }

  /// Crystal over W(F_p) from an integer matrix.
  static FCrystal over_prime_field(std::uint64_t p, int precision, const IntMatrix& f) {
    Matrix<Entry> m(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t j = 0; j < f.cols(); ++j) m(i, j) = {f(i, j)};
    return {p, 1, precision, std::move(m)};
  }

  [[nodiscard]] std::uint64_t prime() const { return p_; }
  [[nodiscard]] int degree() const { return a_; }
  [[nodiscard]] int precision() const { return m_; }
  [[nodiscard]] std::size_t rank() const { return f_.rows(); }
  [[nodiscard]] const Matrix<Entry>& frobenius() const { return f_; }
  [[nodiscard]] const Entry& entry(std::size_t i, std::size_t j) const { return f_(i, j); }

  /// Residues of the entries (a = 1).
  [[nodiscard]] IntMatrix integer_matrix() const {
    if (a_ != 1) throw PreconditionError("integer matrix requires a = 1");
    IntMatrix m(rank(), rank());
    for (std::size_t i = 0; i < rank(); ++i)
      for (std::size_t j = 0; j < rank(); ++j) m(i, j) = f_(i, j)[0];
    return m;
  }

  template <class R>
  [[nodiscard]] detail::RMatrix<R> lifted(const R& ring) const {
    detail::RMatrix<R> m(rank(), rank(), ring.zero());
    for (std::size_t i = 0; i < rank(); ++i)
      for (std::size_t j = 0; j < rank(); ++j) m(i, j) = ring.from_coefficients(f_(i, j));
    return m;
  }

  /// Calls fn(ring) with the local ring W_precision(F_{p^a}).
  template <class Fn>
  decltype(auto) with_ring(int precision, Fn&& fn) const {
    if (a_ == 1) return fn(detail::BigResidueRing(p_, precision));
    return fn(detail::WittRingView(p_, a_, precision));
  }

  friend bool operator==(const FCrystal& x, const FCrystal& y) {
    return x.p_ == y.p_ && x.a_ == y.a_ && x.m_ == y.m_ && x.f_ == y.f_;
  }

 private:
  std::uint64_t p_;
  int a_;
  int m_;
  Matrix<Entry> f_;
};

namespace detail {

/// F sigma(F) ... sigma^{a-1}(F) over the given ring.
template <class R>
RMatrix<R> linearized(const R& ring, const FCrystal& c) {
  RMatrix<R> f = c.lifted(ring);
  RMatrix<R> acc = f;
  RMatrix<R> s = f;
  for (int i = 1; i < c.degree(); ++i) {
    s = ring_frobenius(ring, s);
    acc = ring_mul(ring, acc, s);
  }
  return acc;
}

/// Lower convex hull of points sorted by x.
inline std::vector<std::pair<long, Rational>> lower_hull(
    const std::vector<std::pair<long, Rational>>& pts) {
  std::vector<std::pair<long, Rational>> h;
  for (const auto& p : pts) {
    while (h.size() >= 2) {
      const auto& a = h[h.size() - 2];
      const auto& b = h.back();
      // drop b if it lies on or above segment a-p
      const Rational lhs = (b.second - a.second) * (p.first - a.first);
      const Rational rhs = (p.second - a.second) * (b.first - a.first);
      if (lhs >= rhs) h.pop_back();
      else break;
    }
    h.push_back(p);
  }
  return h;
}

inline Rational hull_value(const std::vector<std::pair<long, Rational>>& h, long x) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (x <= h[i].first) {
      const auto& [x0, y0] = h[i - 1];
      const auto& [x1, y1] = h[i];
      return y0 + (y1 - y0) * Rational(x - x0, x1 - x0);
    }
  return h.back().second;
}

}  // namespace detail

/// Hodge polygon: valuations of the elementary divisors of F at precision m.
inline Polygon hodge_polygon(const FCrystal& c) {
  const auto vals = c.with_ring(c.precision(), [&](const auto& ring) {
    return detail::local_smith(ring, c.lifted(ring)).valuations;
  });
  std::map<Rational, long> slopes;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!vals[i].exact)
      throw PrecisionError("insufficient precision: elementary divisor " + std::to_string(i + 1) +
                           " is 0 mod p^" + std::to_string(c.precision()));
    slopes[Rational(vals[i].value)] += 1;
  }
  return Polygon(slopes);
}

/// Newton polygon of the linearized Frobenius, slopes divided by a.
///
/// Precision: the entries are known mod p^m. A coefficient c_k of the
/// characteristic polynomial is a sum of k x k minors, which move by at most
/// p^{m + H(k-1)} where H(j) is the sum of the j smallest elementary divisor
/// valuations (each capped at m). So c_k is computed at precision
/// m + H(r-1) and certified mod p^{m + H(k-1)}. Uncertified coefficients
/// only matter if their lower bound could dip below the hull.
inline Polygon newton_polygon(const FCrystal& c) {
  const long r = static_cast<long>(c.rank());
  const int m = c.precision();
  const auto smith = c.with_ring(m, [&](const auto& ring) {
    return detail::local_smith(ring, detail::linearized(ring, c)).valuations;
  });
  std::vector<long> h(static_cast<std::size_t>(r) + 1, 0);
  for (long j = 1; j <= r; ++j)
    h[j] = h[j - 1] + std::min<long>(smith[static_cast<std::size_t>(j - 1)].value, m);
  const int big = m + static_cast<int>(r > 0 ? h[r - 1] : 0);
  const auto vals = c.with_ring(big, [&](const auto& ring) {
    std::vector<Valuation> out;
    for (const auto& coeff : detail::charpoly(ring, detail::linearized(ring, c)))
      out.push_back(ring.valuation(coeff));
    return out;
  });

  std::vector<std::pair<long, Rational>> certified;
  std::vector<std::pair<long, long>> bounds;  // uncertified: (k, lower bound)
  for (long k = 0; k <= r; ++k) {
    const long limit = m + (k > 0 ? h[k - 1] : 0);
    const auto& v = vals[static_cast<std::size_t>(k)];
    if (v.exact && v.value < limit) certified.emplace_back(k, Rational(v.value));
    else bounds.emplace_back(k, limit);
  }
  if (certified.back().first != r)
    throw PrecisionError("insufficient precision: Newton polygon vertex at x = " + std::to_string(r) +
                         " (determinant) is not resolved");
  const auto hull = detail::lower_hull(certified);
  for (const auto& [k, b] : bounds)
    if (Rational(b) < detail::hull_value(hull, k))
      throw PrecisionError("insufficient precision: Newton polygon vertex at x = " +
                           std::to_string(k) + " is ambiguous");
  std::map<Rational, long> slopes;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    const long dx = hull[i].first - hull[i - 1].first;
    slopes[(hull[i].second - hull[i - 1].second) / Rational(dx * c.degree())] += dx;
  }
  return Polygon(slopes);
}

struct KatzReport {
  bool passed = false;
  bool endpoints_match = false;
  std::optional<long> violation;  // first x with Newton(x) < Hodge(x)
  Polygon newton;
  Polygon hodge;
  std::string message;
};

inline KatzReport katz_check(const FCrystal& c) {
  KatzReport rep;
  rep.newton = newton_polygon(c);
  rep.hodge = hodge_polygon(c);
  const long r = static_cast<long>(c.rank());
  rep.endpoints_match = rep.newton.length() == r && rep.hodge.length() == r &&
                        rep.newton.total() == rep.hodge.total();
  for (long x = 0; x <= r && !rep.violation; ++x)
    if (rep.newton.value_at(x) < rep.hodge.value_at(x)) rep.violation = x;
  rep.passed = rep.endpoints_match && !rep.violation;
  if (rep.violation)
    rep.message = "Newton below Hodge at x = " + std::to_string(*rep.violation);
  else if (!rep.endpoints_match)
    rep.message = "endpoints differ: Newton " + rep.newton.total().get_str() + ", Hodge " +
                  rep.hodge.total().get_str();
  else
    rep.message = "ok";
  return rep;
}

/// (N, p^{-i} F): polygons shift by -i.
struct TwistedCrystal {
  FCrystal crystal;
  long twist = 0;
};

inline TwistedCrystal tate_twist(const FCrystal& c, long i) { return {c, i}; }
inline TwistedCrystal tate_twist(const TwistedCrystal& c, long i) { return {c.crystal, c.twist + i}; }
inline Polygon newton_polygon(const TwistedCrystal& c) {
  return newton_polygon(c.crystal).shifted(Rational(-c.twist));
}
inline Polygon hodge_polygon(const TwistedCrystal& c) {
  return hodge_polygon(c.crystal).shifted(Rational(-c.twist));
}

/// g F sigma(g)^{-1}, the matrix of F in the basis given by the columns of g^{-1}.
inline FCrystal base_change(const FCrystal& c, const Matrix<FCrystal::Entry>& g) {
  return c.with_ring(c.precision(), [&](const auto& ring) {
    using R = std::decay_t<decltype(ring)>;
    detail::RMatrix<R> gm(g.rows(), g.cols(), ring.zero());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gm(i, j) = ring.from_coefficients(g(i, j));
    const auto inv = detail::local_inverse(ring, detail::ring_frobenius(ring, gm));
    if (!inv) throw PreconditionError("base change matrix is not invertible");
    const auto f = detail::ring_mul(ring, detail::ring_mul(ring, gm, c.lifted(ring)), *inv);
    Matrix<FCrystal::Entry> out(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t j = 0; j < f.cols(); ++j) out(i, j) = ring.coefficients(f(i, j));
    return FCrystal(c.prime(), c.degree(), c.precision(), std::move(out));
  });
}

inline FCrystal base_change(const FCrystal& c, const IntMatrix& g) {
  Matrix<FCrystal::Entry> m(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) m(i, j) = {g(i, j)};
  return base_change(c, m);
}

inline constexpr int kMaxK3Height = 10;

namespace detail {

/// F(e_i) = p e_{i+1} for i < h and F(e_h) = p^corner e_1, placed at offset.
inline void put_cyclic_block(IntMatrix& f, std::size_t offset, int h, const Integer& step,
                             const Integer& corner) {
  for (int i = 0; i + 1 < h; ++i) f(offset + i + 1, offset + i) = step;
  f(offset, offset + h - 1) += corner;
}

}  // namespace detail

/// Rank-22 crystal with Newton slopes {1-1/h: h, 1: 22-2h, 1+1/h: h} and Hodge
/// slopes {0:1, 1:20, 2:1}; h = nullopt is the supersingular model p Id.
inline FCrystal k3_model_crystal(std::optional<int> h, std::uint64_t p, int precision = 12) {
  require_prime(p);
  const Integer pp = from_u64(p);
  IntMatrix f(22, 22, Integer(0));
  if (!h) {
    for (std::size_t i = 0; i < 22; ++i) f(i, i) = pp;
    return FCrystal::over_prime_field(p, precision, f);
  }
  if (*h < 1 || *h > kMaxK3Height) throw PreconditionError("height must be in 1..10 or infinite");
  const int hh = *h;
  detail::put_cyclic_block(f, 0, hh, pp, Integer(1));
  for (int i = hh; i < 22 - hh; ++i) f(i, i) = pp;
  detail::put_cyclic_block(f, 22 - hh, hh, pp, pp * pp);
  return FCrystal::over_prime_field(p, precision, f);
}

/// Companion blocks for t^h - p^{h-1} and t^h - p^{h+1} around p Id: right
/// Newton slopes, wrong Hodge numbers.
inline FCrystal naive_companion_crystal(int h, std::uint64_t p, int precision = 12) {
  require_prime(p);
  if (h < 1 || h > kMaxK3Height) throw PreconditionError("height must be in 1..10");
  const Integer pp = from_u64(p);
  IntMatrix f(22, 22, Integer(0));
  detail::put_cyclic_block(f, 0, h, Integer(1), ipow(pp, static_cast<unsigned long>(h - 1)));
  for (int i = h; i < 22 - h; ++i) f(i, i) = pp;
  detail::put_cyclic_block(f, 22 - h, h, Integer(1), ipow(pp, static_cast<unsigned long>(h + 1)));
  return FCrystal::over_prime_field(p, precision, f);
}

inline Polygon k3_newton_table(std::optional<int> h) {
  if (!h) return Polygon({{Rational(1), 22}});
  const int hh = *h;
  std::map<Rational, long> m;
  m[Rational(1) - Rational(1, hh)] += hh;
  m[Rational(1)] += 22 - 2 * hh;
  m[Rational(1) + Rational(1, hh)] += hh;
  return Polygon(m);
}

inline Polygon k3_hodge_table() {
  return Polygon({{Rational(0), 1}, {Rational(1), 20}, {Rational(2), 1}});
}

struct K3Verdict {
  enum class Kind { FiniteHeight, Supersingular, NotK3Shaped };
  Kind kind = Kind::NotK3Shaped;
  int height = 0;
  std::string reason;
  Polygon newton;
  Polygon hodge;
};

inline K3Verdict check_k3_crystal(const FCrystal& c) {
  if (c.rank() != 22) throw PreconditionError("K3 crystals have rank 22");
  K3Verdict v;
  v.hodge = hodge_polygon(c);
  v.newton = newton_polygon(c);
  // The supersingular model p Id has Hodge slopes {1:22}; it is accepted
  // alongside the K3 Hodge table when every Newton slope is 1.
  const bool pure_one = v.hodge == Polygon({{Rational(1), 22}});
  if (v.newton == k3_newton_table(std::nullopt) && (pure_one || v.hodge == k3_hodge_table())) {
    v.kind = K3Verdict::Kind::Supersingular;
    return v;
  }
  if (!(v.hodge == k3_hodge_table())) {
    v.reason = "Hodge polygon " + v.hodge.str() + " is not " + k3_hodge_table().str();
    return v;
  }
  for (int h = 1; h <= kMaxK3Height; ++h)
    if (v.newton == k3_newton_table(h)) {
      v.kind = K3Verdict::Kind::FiniteHeight;
      v.height = h;
      return v;
    }
  v.reason = "Newton polygon " + v.newton.str() + " matches no height";
  return v;
}

struct SlopeDecomposition {
  FCrystal sub;
  FCrystal quotient;
  IntMatrix basis;  // columns: the adapted basis in the old coordinates, mod p^m
  long iterations = 0;  // the power N of F that separated the slopes
};

/// Sub-crystal of slopes < s and its quotient (a = 1). The adapted basis is
/// read off the Smith left transform of F^N mod p^P for N = 1, 2, 4, ...,
/// once the elementary divisors split at index k with a gap of at least m
/// and the resulting block form is F-stable mod p^m.
inline SlopeDecomposition slope_decompose(const FCrystal& c, const Rational& s,
                                          long max_power = 1L << 14) {
  if (c.degree() != 1) throw PreconditionError("slope decomposition requires a = 1");
  const Polygon newton = newton_polygon(c);
  const Polygon hodge = hodge_polygon(c);
  long k = 0;
  for (const auto& [slope, mult] : newton.slopes())
    if (slope < s) k += mult;
  const long r = static_cast<long>(c.rank());
  if (k == 0 || k == r)
    throw PreconditionError("slope " + s.get_str() + " does not split the Newton polygon");
  if (newton.value_at(k) != hodge.value_at(k))
    throw PreconditionError("Katz condition fails: Newton and Hodge polygons differ at x = " +
                            std::to_string(k));
  const int m = c.precision();
  const long hodge_total = to_long(floor_rational(hodge.total()).get_num());
  const Integer mod_m = ipow(c.prime(), static_cast<unsigned long>(m));
  const IntMatrix f = c.integer_matrix();
  const auto uk = static_cast<std::size_t>(k);
  for (long n = 1; n <= max_power; n *= 2) {
    const long prec = 2L * m + to_long(ceil_rational(s * n).get_num()) + hodge_total;
    const detail::BigResidueRing ring(c.prime(), static_cast<int>(prec));
    // F^n mod p^prec by repeated squaring
    IntMatrix base = f, power = identity_int(c.rank());
    for (long e = n; e > 0; e >>= 1) {
      if (e & 1) power = detail::ring_mul(ring, power, base);
      if (e > 1) base = detail::ring_mul(ring, base, base);
    }
    const auto smith = detail::local_smith(ring, power, true);
    const auto& ev = smith.valuations;
    if (!ev[uk - 1].exact) continue;
    const long gap = ev[uk].value - ev[uk - 1].value;
    if (gap < m) continue;
    const detail::BigResidueRing low(c.prime(), m);
    IntMatrix u = *smith.left, uinv = *smith.left_inverse;
    for (auto* mat : {&u, &uinv})
      for (std::size_t i = 0; i < mat->rows(); ++i)
        for (std::size_t j = 0; j < mat->cols(); ++j) (*mat)(i, j) = mod_floor((*mat)(i, j), mod_m);
    const IntMatrix adapted = detail::ring_mul(low, detail::ring_mul(low, u, f), uinv);
    bool stable = true;
    for (std::size_t i = uk; i < c.rank() && stable; ++i)
      for (std::size_t j = 0; j < uk; ++j)
        if (adapted(i, j) != 0) {
          stable = false;
          break;
        }
    if (!stable) continue;
    const std::size_t rest = c.rank() - uk;
    return {FCrystal::over_prime_field(c.prime(), m, adapted.block(0, 0, uk, uk)),
            FCrystal::over_prime_field(c.prime(), m, adapted.block(uk, uk, rest, rest)),
            std::move(uinv), n};
  }
  throw PrecisionError("insufficient precision: slopes did not separate up to F^" +
                       std::to_string(max_power));
}

}  // namespace k3arith
