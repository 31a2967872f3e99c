#pragma once

// One-dimensional commutative formal group laws over Z/p^m and W_m(F_{p^a}),
// truncated in total degree N. Laws built from a rational logarithm keep it,
// which gives the action of scalars a -> [a](x) = exp(a log x).

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/padic.hpp"
#include "k3arith/series.hpp"
#include "k3arith/witt.hpp"

namespace k3arith {

/// Associativity is verified on construction up to this total degree (or N).
inline constexpr std::size_t kAssociativityCheckDegree = 40;

// Scalars acting on a law over W_m(F_{p^a}) are exact elements of
// Z_p[t]/(Phi), given by a integer coefficients.
using WittScalar = std::vector<Integer>;

inline int ring_degree(const ResidueRing&) { return 1; }
inline int ring_degree(const WittRing& r) { return r.degree(); }

inline std::vector<Integer> exact_coefficients(const ResidueRing& r, ResidueRing::Elem x) {
  return {r.lift(x)};
}
inline std::vector<Integer> exact_coefficients(const WittRing& r, const WittRing::Elem& x) {
  return r.lift(x);
}

inline ResidueRing::Elem from_exact(const ResidueRing& r, const std::vector<Integer>& c) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] != 0) throw PreconditionError("scalar has too many coefficients");
  return c.empty() ? r.zero() : r.from_integer(c[0]);
}
inline WittRing::Elem from_exact(const WittRing& r, const std::vector<Integer>& c) {
  return r.from_coefficients(c);
}

template <class R>
typename R::Elem from_rational(const R& r, const Rational& x) {
  return r.from_integer(reduce_rational(x, from_u64(r.modulus())));
}

template <class R>
concept FglRing = CoefficientRing<R> && requires(const R& r, const typename R::Elem& x) {
  { r.prime() } -> std::convertible_to<std::uint64_t>;
  { r.precision() } -> std::convertible_to<int>;
  { r.is_unit(x) } -> std::convertible_to<bool>;
  { r.truncated(1) } -> std::convertible_to<R>;
  { ring_degree(r) } -> std::convertible_to<int>;
};

using RationalSeries = PowerSeries<RationalField>;

/// sum_{i >= 0, p^{hi} < N} x^{p^{hi}} / p^i.
inline RationalSeries honda_log(int h, std::uint64_t p, std::size_t trunc) {
  if (h < 1) throw PreconditionError("height must be positive");
  require_prime(p);
  RationalSeries s(RationalField{}, trunc);
  Integer q = ipow(p, static_cast<unsigned long>(h));
  Integer deg = 1;
  Integer den = 1;
  while (deg < Integer(static_cast<unsigned long>(trunc))) {
    s[to_u64(deg)] = Rational(1) / Rational(den);
    deg *= q;
    den *= from_u64(p);
  }
  return s;
}

/// log(1 + x).
inline RationalSeries multiplicative_log(std::size_t trunc) {
  RationalSeries s(RationalField{}, trunc);
  for (std::size_t n = 1; n < trunc; ++n)
    s[n] = Rational(n % 2 ? 1 : -1, static_cast<unsigned long>(n));
  return s;
}

inline RationalSeries additive_log(std::size_t trunc) {
  return RationalSeries::variable(RationalField{}, trunc);
}

namespace detail {

/// exp(log x + log y) over Q. With D = (1/log') d/dx, g_0 = x and
/// g_{j+1} = D g_j, one has F = sum_j g_j(x) log(y)^j / j!.
inline BivariateSeries<RationalField> law_over_q(const RationalSeries& ell, std::size_t n) {
  const RationalField q;
  BivariateSeries<RationalField> f(q, n);
  if (n < 2) return f;
  const RationalSeries inv_deriv = ell.truncated(n).derivative().reciprocal();
  std::vector<RationalSeries> g;
  g.push_back(RationalSeries::variable(q, n));
  for (std::size_t j = 1; j < n; ++j) g.push_back(g.back().derivative() * inv_deriv);
  // log(y)^j, multiplied with the sparse factor on the left
  std::vector<RationalSeries> lpow;
  RationalSeries one(q, n);
  one[0] = 1;
  lpow.push_back(one);
  for (std::size_t j = 1; j < n; ++j) lpow.push_back(ell.truncated(n) * lpow.back());
  Rational fact = 1;
  std::vector<Rational> inv_fact(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) fact *= static_cast<unsigned long>(j);
    inv_fact[j] = 1 / fact;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; a + b < n; ++b) {
      Rational s = 0;
      for (std::size_t j = 0; j <= b; ++j) {
        if (sgn(g[j][a]) == 0 || sgn(lpow[j][b]) == 0) continue;
        s += g[j][a] * lpow[j][b] * inv_fact[j];
      }
      f.at(a, b) = s;
    }
  return f;
}

template <class R>
BivariateSeries<R> reduce_series(const BivariateSeries<R>& f, const R& lower) {
  BivariateSeries<R> r(lower, f.trunc());
  const R& upper = f.ring();
  for (std::size_t d = 0; d < f.trunc(); ++d)
    for (std::size_t j = 0; j <= d; ++j) r.at(d - j, j) = upper.reduce_to(f.at(d - j, j), lower);
  return r;
}

template <class R>
PowerSeries<R> reduce_series(const PowerSeries<R>& f, const R& lower) {
  PowerSeries<R> r(lower, f.trunc());
  for (std::size_t i = 0; i < f.trunc(); ++i) r[i] = f.ring().reduce_to(f[i], lower);
  return r;
}

/// First (i, j, k) with F(F(x,y),z) != F(x,F(y,z)) in total degree < d.
/// Both sides only need the bivariate powers of F:
///   [x^i y^j z^k] F(F(x,y),z) = sum_a F_{a,k} [x^i y^j] F^a
///   [x^i y^j z^k] F(x,F(y,z)) = sum_b F_{i,b} [x^j y^k] F^b
template <class R>
std::optional<std::array<std::size_t, 3>> associativity_defect(const BivariateSeries<R>& f,
                                                               std::size_t d) {
  const R& ring = f.ring();
  const BivariateSeries<R> ft = f.truncated(d);
  std::vector<BivariateSeries<R>> pw;
  BivariateSeries<R> one(ring, d);
  if (d > 0) one.at(0, 0) = ring.one();
  pw.push_back(one);
  for (std::size_t a = 1; a < d; ++a) pw.push_back(pw.back() * ft);
  for (std::size_t t = 0; t < d; ++t)
    for (std::size_t i = 0; i <= t; ++i)
      for (std::size_t j = 0; i + j <= t; ++j) {
        const std::size_t k = t - i - j;
        auto lhs = ring.zero();
        for (std::size_t a = 0; a <= i + j && a + k < d; ++a) {
          const auto& c = ft.at(a, k);
          if (ring.is_zero(c)) continue;
          lhs = ring.add(lhs, ring.mul(c, pw[a].at(i, j)));
        }
        auto rhs = ring.zero();
        for (std::size_t b = 0; b <= j + k && i + b < d; ++b) {
          const auto& c = ft.at(i, b);
          if (ring.is_zero(c)) continue;
          rhs = ring.add(rhs, ring.mul(c, pw[b].at(j, k)));
        }
        if (!(lhs == rhs)) return std::array<std::size_t, 3>{i, j, k};
      }
  return std::nullopt;
}

/// r_{n,k} = e_k [x^n] log^k with exp = sum e_k x^k, so that
/// [a](x) = sum_n (sum_k r_{n,k} a^k) x^n. Stored scaled by p^shift.
struct ActionTable {
  long shift = 0;
  std::vector<std::vector<Rational>> scaled;  // scaled[n][k], k <= n
};

inline ActionTable action_table(const RationalSeries& ell, std::size_t n, std::uint64_t p) {
  const RationalField q;
  ActionTable t;
  const RationalSeries e = series_reverse(ell.truncated(n), n);
  std::vector<std::vector<Rational>> r(n, std::vector<Rational>(n, Rational(0)));
  RationalSeries pw(q, n);
  if (n > 0) pw[0] = 1;
  long shift = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) pw = ell.truncated(n) * pw;
    const Rational ek = k == 0 ? Rational(0) : e[k];
    if (sgn(ek) == 0) continue;
    for (std::size_t m = k; m < n; ++m) {
      if (sgn(pw[m]) == 0) continue;
      r[m][k] = ek * pw[m];
      shift = std::max(shift, -valuation(r[m][k], p));
    }
  }
  const Rational scale(ipow(p, static_cast<unsigned long>(shift)));
  for (auto& row : r)
    for (auto& v : row) v *= scale;
  t.shift = shift;
  t.scaled = std::move(r);
  return t;
}

}  // namespace detail

template <FglRing R>
class FormalGroupLaw {
 public:
  using Elem = typename R::Elem;

  /// Checks F(x,0) = x, F(0,y) = y, F(x,y) = F(y,x) to degree N and
  /// associativity to degree min(N, kAssociativityCheckDegree).
  explicit FormalGroupLaw(BivariateSeries<R> f, std::optional<RationalSeries> log = std::nullopt)
      : state_(std::make_shared<State>(std::move(f), std::move(log))) {
    const auto& F = state_->series;
    const R& ring = F.ring();
    const std::size_t n = F.trunc();
    for (std::size_t i = 0; i < n; ++i) {
      const auto want = i == 1 ? ring.one() : ring.zero();
      if (!(F.at(i, 0) == want) || !(F.at(0, i) == want))
        throw PreconditionError("not a formal group law: F(x,0) != x at degree " +
                                std::to_string(i));
    }
    if (auto w = F.first_difference(F.swapped()))
      throw PreconditionError("not a formal group law: not commutative at x^" +
                              std::to_string(w->first) + " y^" + std::to_string(w->second));
    if (auto w = detail::associativity_defect(F, std::min(n, kAssociativityCheckDegree)))
      throw PreconditionError("not a formal group law: not associative at x^" +
                              std::to_string((*w)[0]) + " y^" + std::to_string((*w)[1]) +
                              " z^" + std::to_string((*w)[2]));
  }

  [[nodiscard]] const R& ring() const { return state_->series.ring(); }
  [[nodiscard]] std::uint64_t prime() const { return ring().prime(); }
  [[nodiscard]] int precision() const { return ring().precision(); }
  [[nodiscard]] std::size_t trunc() const { return state_->series.trunc(); }
  [[nodiscard]] const BivariateSeries<R>& series() const { return state_->series; }
  [[nodiscard]] const Elem& coefficient(std::size_t i, std::size_t j) const {
    return state_->series.at(i, j);
  }
  [[nodiscard]] const std::optional<RationalSeries>& log() const { return state_->log; }

  /// The same law modulo p^k.
  [[nodiscard]] FormalGroupLaw reduced(int k) const {
    if (k < 1 || k > precision()) throw PreconditionError("reduction precision out of range");
    if (k == precision()) return *this;
    return FormalGroupLaw(detail::reduce_series(series(), ring().truncated(k)), log());
  }

  [[nodiscard]] const detail::ActionTable& action_table() const {
    if (!log()) throw PreconditionError("scalar action needs the logarithm of the law");
    std::call_once(state_->action_once, [&] {
      state_->action = detail::action_table(*log(), trunc(), prime());
    });
    return state_->action;
  }

  friend bool operator==(const FormalGroupLaw& a, const FormalGroupLaw& b) {
    return a.series() == b.series();
  }

 private:
  struct State {
    State(BivariateSeries<R> f, std::optional<RationalSeries> l)
        : series(std::move(f)), log(std::move(l)) {}
    BivariateSeries<R> series;
    std::optional<RationalSeries> log;
    std::once_flag action_once;
    detail::ActionTable action;
  };
  std::shared_ptr<State> state_;
};

/// F(x, y) = exp(log x + log y) reduced into `ring`. Every coefficient over Q
/// must be p-integral.
template <FglRing R>
FormalGroupLaw<R> fgl_from_log(const RationalSeries& log, const R& ring, std::size_t trunc) {
  if (log.trunc() < trunc) throw PreconditionError("log is truncated below N");
  if (trunc > 0 && sgn(log[0]) != 0) throw PreconditionError("log must vanish at 0");
  if (trunc > 1 && log[1] != 1) throw PreconditionError("log must have linear term x");
  const auto fq = detail::law_over_q(log, trunc);
  const std::uint64_t p = ring.prime();
  BivariateSeries<R> f(ring, trunc);
  for (std::size_t d = 0; d < trunc; ++d)
    for (std::size_t j = 0; j <= d; ++j) {
      const Rational& c = fq.at(d - j, j);
      if (sgn(c) == 0) continue;
      if (valuation(c, p) < 0)
        throw PreconditionError("log does not define an integral group law (coefficient of x^" +
                                std::to_string(d - j) + " y^" + std::to_string(j) + " is " +
                                c.get_str() + ")");
      f.at(d - j, j) = from_rational(ring, c);
    }
  return FormalGroupLaw<R>(std::move(f), log.truncated(trunc));
}

template <FglRing R>
FormalGroupLaw<R> additive_law(const R& ring, std::size_t trunc) {
  return fgl_from_log(additive_log(trunc), ring, trunc);
}

template <FglRing R>
FormalGroupLaw<R> multiplicative_law(const R& ring, std::size_t trunc) {
  return fgl_from_log(multiplicative_log(trunc), ring, trunc);
}

/// Honda's law of height h: log = sum x^{p^{hi}} / p^i.
template <FglRing R>
FormalGroupLaw<R> honda_law(int h, const R& ring, std::size_t trunc) {
  return fgl_from_log(honda_log(h, ring.prime(), trunc), ring, trunc);
}

/// [n](x) for n >= 0, via [k+1](x) = F(x, [k](x)).
template <FglRing R>
PowerSeries<R> n_series(const FormalGroupLaw<R>& f, std::uint64_t n) {
  PowerSeries<R> acc(f.ring(), f.trunc());
  for (std::uint64_t k = 0; k < n; ++k) acc = f.series().along(acc);
  return acc;
}

template <FglRing R>
PowerSeries<R> p_series(const FormalGroupLaw<R>& f) {
  return n_series(f, f.prime());
}

/// Height of the reduction mod p: exact, or only a lower bound when [p](x)
/// vanishes mod p below x^N.
struct HeightResult {
  std::optional<long> height;
  long lower_bound = 0;
  [[nodiscard]] std::string str() const {
    return height ? std::to_string(*height) : ">= " + std::to_string(lower_bound);
  }
  friend bool operator==(const HeightResult&, const HeightResult&) = default;
};

template <FglRing R>
HeightResult height(const FormalGroupLaw<R>& f) {
  const std::uint64_t p = f.prime();
  if (f.trunc() <= p) throw PreconditionError("truncation too small to measure height");
  const auto ps = p_series(f.reduced(1));
  if (auto k = ps.order()) {
    std::uint64_t q = 1;
    long h = 0;
    while (q < *k) {
      q *= p;
      ++h;
    }
    if (q != *k)
      throw PreconditionError("[p](x) mod p starts at x^" + std::to_string(*k) +
                              ", not a power of p");
    return {h, h};
  }
  long h = 0;
  for (std::uint64_t q = 1; q < f.trunc(); q *= p) ++h;
  return {std::nullopt, h};
}

/// First (i, j) where phi(F(x,y)) and G(phi(x), phi(y)) differ, if any.
template <FglRing R>
std::optional<std::pair<std::size_t, std::size_t>> homomorphism_defect(
    const FormalGroupLaw<R>& source, const FormalGroupLaw<R>& target, const PowerSeries<R>& phi) {
  if (phi.trunc() > 0 && !phi.ring().is_zero(phi[0]))
    throw PreconditionError("homomorphism must vanish at 0");
  const auto lhs = source.series().compose_into(phi);
  const auto rhs = target.series().substitute(phi, phi);
  return lhs.first_difference(rhs);
}

template <FglRing R>
struct FglHom {
  FormalGroupLaw<R> source;
  FormalGroupLaw<R> target;
  PowerSeries<R> phi;

  [[nodiscard]] bool is_homomorphism() const {
    return !homomorphism_defect(source, target, phi).has_value();
  }
};

/// Exact arithmetic on scalars in Z_p[t]/(Phi), Phi the modulus of `ring`.
template <FglRing R>
WittScalar scalar_mul(const R& ring, const WittScalar& x, const WittScalar& y) {
  const int a = ring_degree(ring);
  const BigWittRing shape(ring.prime(), a, 1);
  std::vector<Integer> c(2 * a - 1, Integer(0));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) c[i + j] += x[i] * y[j];
  for (int k = static_cast<int>(c.size()) - 1; k >= a; --k) {
    for (int i = 0; i < a; ++i) c[k - a + i] -= c[k] * shape.phi()[i];
    c[k] = 0;
  }
  c.resize(a);
  return c;
}

inline WittScalar scalar_add(const WittScalar& x, const WittScalar& y) {
  WittScalar r(std::max(x.size(), y.size()), Integer(0));
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += x[i];
  for (std::size_t i = 0; i < y.size(); ++i) r[i] += y[i];
  return r;
}

/// [a](x) = exp(a log x) modulo p^m, for an exact scalar a. Computed at
/// precision m + s, s the largest p-power denominator of the rational
/// coefficients. Throws when [a] is not p-integral; with `verify` the
/// homomorphism law is rechecked over the ring.
template <FglRing R>
FglHom<R> a_series(const FormalGroupLaw<R>& f, const WittScalar& a, bool verify = true) {
  const R& ring = f.ring();
  const int deg = ring_degree(ring);
  if (static_cast<int>(a.size()) > deg) throw PreconditionError("scalar has too many coefficients");
  const auto& table = f.action_table();
  const long s = table.shift;
  const std::size_t n = f.trunc();
  const BigWittRing big(f.prime(), deg, f.precision() + static_cast<int>(s));
  std::vector<BigWittRing::Elem> apow;
  apow.push_back(big.one());
  const auto abig = big.from_coefficients(a);
  for (std::size_t k = 1; k < n; ++k) apow.push_back(big.mul(apow.back(), abig));
  PowerSeries<R> phi(ring, n);
  for (std::size_t m = 1; m < n; ++m) {
    auto acc = big.zero();
    for (std::size_t k = 1; k <= m; ++k) {
      const Rational& r = table.scaled[m][k];
      if (sgn(r) == 0) continue;
      acc = big.add(acc, big.mul(big.from_integer(reduce_rational(r, big.modulus())), apow[k]));
    }
    const auto v = big.valuation(acc);
    if (v.exact && v.value < s)
      throw PreconditionError("a does not act integrally (coefficient of x^" + std::to_string(m) +
                              ")");
    phi[m] = from_exact(ring, big.divide_by_p_power(acc, s));
  }
  FglHom<R> hom{f, f, std::move(phi)};
  if (verify) {
    if (auto w = homomorphism_defect(f, f, hom.phi))
      throw std::logic_error("[a] fails the homomorphism law at x^" + std::to_string(w->first) +
                             " y^" + std::to_string(w->second));
  }
  return hom;
}

/// Does the mod p reduction of phi stay a homomorphism of the reduced laws?
struct ReductionReport {
  bool commutes = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  [[nodiscard]] std::string str() const {
    if (commutes) return "reduction commutes";
    return "reduction fails at x^" + std::to_string(witness->first) + " y^" +
           std::to_string(witness->second);
  }
};

template <FglRing R>
ReductionReport reduction_commutes(const FglHom<R>& hom) {
  const auto src = hom.source.reduced(1);
  const auto tgt = hom.target.reduced(1);
  const auto phi = detail::reduce_series(hom.phi, src.ring());
  auto w = homomorphism_defect(src, tgt, phi);
  return {!w.has_value(), w};
}

}  // namespace k3arith
