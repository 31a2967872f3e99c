#pragma once

// Truncated unramified Witt rings W_m(F_{p^a}) = (Z/p^m)[t]/(Phi).
//
// Phi is the lexicographically least monic irreducible polynomial of degree a
// over F_p, taken with coefficients in [0, p). Any such lift cuts out the
// unramified extension of degree a; the Frobenius sigma is then determined by
// sigma(t) = the unique root of Phi congruent to t^p modulo p, found by Newton
// iteration.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/padic.hpp"

namespace k3arith {

inline constexpr int kMaxResidueDegree = 8;

namespace detail {

// Polynomials over F_p, coefficients low to high, no trailing zeros.
using FpPoly = std::vector<std::uint64_t>;

inline void fp_trim(FpPoly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline std::uint64_t fp_inv(std::uint64_t a, std::uint64_t p) {
  std::uint64_t r = 1, b = a % p, e = p - 2;
  while (e) {
    if (e & 1) r = mulmod(r, b, p);
    b = mulmod(b, b, p);
    e >>= 1;
  }
  return r;
}

inline FpPoly fp_mod(FpPoly a, const FpPoly& f, std::uint64_t p) {
  fp_trim(a);
  const std::uint64_t lead_inv = fp_inv(f.back(), p);
  while (a.size() >= f.size()) {
    const std::uint64_t c = mulmod(a.back(), lead_inv, p);
    const std::size_t shift = a.size() - f.size();
    for (std::size_t i = 0; i < f.size(); ++i)
      a[shift + i] = (a[shift + i] + p - mulmod(c, f[i], p)) % p;
    fp_trim(a);
  }
  return a;
}

inline FpPoly fp_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& f,
                        std::uint64_t p) {
  if (a.empty() || b.empty()) return {};
  FpPoly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c[i + j] = (c[i + j] + mulmod(a[i], b[j], p)) % p;
  return fp_mod(std::move(c), f, p);
}

inline FpPoly fp_powmod(FpPoly base, Integer e, const FpPoly& f, std::uint64_t p) {
  FpPoly r{1};
  base = fp_mod(std::move(base), f, p);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = fp_mulmod(r, base, f, p);
    base = fp_mulmod(base, base, f, p);
    e >>= 1;
  }
  return r;
}

inline FpPoly fp_sub(FpPoly a, const FpPoly& b, std::uint64_t p) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
  fp_trim(a);
  return a;
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b, std::uint64_t p) {
  fp_trim(a);
  fp_trim(b);
  while (!b.empty()) {
    FpPoly r = fp_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// Rabin's irreducibility test for a monic polynomial of degree a.
inline bool fp_is_irreducible(const FpPoly& f, std::uint64_t p) {
  const int a = static_cast<int>(f.size()) - 1;
  if (a <= 0) return false;
  if (a == 1) return true;
  const FpPoly x{0, 1};
  if (fp_sub(fp_powmod(x, ipow(p, a), f, p), x, p).size() != 0) return false;
  for (int q = 2; q <= a; ++q) {
    if (a % q != 0 || !is_prime(static_cast<std::uint64_t>(q))) continue;
    FpPoly g = fp_sub(fp_powmod(x, ipow(p, a / q), f, p), x, p);
    if (fp_gcd(f, g, p).size() != 1) return false;
  }
  return true;
}

/// Least monic irreducible of degree a, ordering coefficient tuples
/// (c_{a-1}, ..., c_0) lexicographically. Returns c_0..c_{a-1}, c_a = 1.
inline FpPoly least_irreducible(std::uint64_t p, int a) {
  if (a == 1) return {0, 1};
  std::vector<std::uint64_t> digits(a, 0);  // digits[0] = c_{a-1}
  for (;;) {
    FpPoly f(a + 1);
    for (int i = 0; i < a; ++i) f[a - 1 - i] = digits[i];
    f[a] = 1;
    if (f[0] != 0 && fp_is_irreducible(f, p)) return f;
    int k = a - 1;
    while (k >= 0 && ++digits[k] == p) digits[k--] = 0;
    if (k < 0) throw std::logic_error("no irreducible polynomial found");
  }
}

/// Inverse of a nonzero element of F_p[t]/(f), f irreducible.
inline FpPoly fp_field_inverse(const FpPoly& x, const FpPoly& f, std::uint64_t p) {
  // extended Euclid: track s with s*x == r (mod f)
  FpPoly r0 = f, r1 = fp_mod(x, f, p);
  FpPoly s0{}, s1{1};
  if (r1.empty()) throw PreconditionError("zero has no inverse");
  while (r1.size() > 1) {
    // q = r0 div r1
    FpPoly q(r0.size() - r1.size() + 1, 0);
    FpPoly rem = r0;
    const std::uint64_t lead_inv = fp_inv(r1.back(), p);
    while (rem.size() >= r1.size()) {
      const std::uint64_t c = mulmod(rem.back(), lead_inv, p);
      const std::size_t shift = rem.size() - r1.size();
      q[shift] = c;
      for (std::size_t i = 0; i < r1.size(); ++i)
        rem[shift + i] = (rem[shift + i] + p - mulmod(c, r1[i], p)) % p;
      fp_trim(rem);
    }
    fp_trim(q);
    FpPoly qs;
    if (!q.empty() && !s1.empty()) {
      qs.assign(q.size() + s1.size() - 1, 0);
      for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < s1.size(); ++j)
          qs[i + j] = (qs[i + j] + mulmod(q[i], s1[j], p)) % p;
    }
    FpPoly s2 = fp_sub(s0, qs, p);
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
    if (r1.empty()) throw std::logic_error("modulus is not irreducible");
  }
  const std::uint64_t c = fp_inv(r1[0], p);
  for (auto& v : s1) v = mulmod(v, c, p);
  return fp_mod(s1, f, p);
}

}  // namespace detail

/// W(F_{p^a}) modulo p^N with GMP coefficients; used where intermediate
/// precision exceeds the 63-bit residue range.
class BigWittRing {
 public:
  using Elem = std::vector<Integer>;  // exactly `degree()` coefficients

  BigWittRing(std::uint64_t p, int a, int precision) : p_(p), a_(a), m_(precision) {
    require_prime(p);
    if (a < 1) throw PreconditionError("residue degree must be positive");
    if (precision < 1) throw PreconditionError("precision must be positive");
    modulus_ = ipow(p, static_cast<unsigned long>(precision));
    const detail::FpPoly phi = detail::least_irreducible(p, a);
    for (int i = 0; i < a; ++i) phi_.push_back(from_u64(phi[i]));
    phi_poly_ = phi;
    compute_sigma();
  }

  [[nodiscard]] std::uint64_t prime() const { return p_; }
  [[nodiscard]] int degree() const { return a_; }
  [[nodiscard]] int precision() const { return m_; }
  [[nodiscard]] const Integer& modulus() const { return modulus_; }
  /// c_0..c_{a-1} of the monic modulus Phi.
  [[nodiscard]] const std::vector<Integer>& phi() const { return phi_; }

  [[nodiscard]] Elem zero() const { return Elem(a_, Integer(0)); }
  [[nodiscard]] Elem one() const { return from_integer(1); }
  [[nodiscard]] Elem from_integer(const Integer& x) const {
    Elem e = zero();
    e[0] = mod_floor(x, modulus_);
    return e;
  }
  [[nodiscard]] Elem from_coefficients(const std::vector<Integer>& c) const {
    if (static_cast<int>(c.size()) > a_) throw PreconditionError("too many coefficients");
    Elem e = zero();
    for (std::size_t i = 0; i < c.size(); ++i) e[i] = mod_floor(c[i], modulus_);
    return e;
  }
  [[nodiscard]] Elem add(const Elem& x, const Elem& y) const {
    Elem r(a_);
    for (int i = 0; i < a_; ++i) {
      r[i] = x[i] + y[i];
      if (r[i] >= modulus_) r[i] -= modulus_;
    }
    return r;
  }
  [[nodiscard]] Elem sub(const Elem& x, const Elem& y) const {
    Elem r(a_);
    for (int i = 0; i < a_; ++i) {
      r[i] = x[i] - y[i];
      if (r[i] < 0) r[i] += modulus_;
    }
    return r;
  }
  [[nodiscard]] Elem neg(const Elem& x) const { return sub(zero(), x); }
  [[nodiscard]] Elem mul(const Elem& x, const Elem& y) const {
    if (a_ == 1) return {mod_floor(x[0] * y[0], modulus_)};
    std::vector<Integer> c(2 * a_ - 1, Integer(0));
    for (int i = 0; i < a_; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < a_; ++j) c[i + j] += x[i] * y[j];
    }
    for (int k = 2 * a_ - 2; k >= a_; --k) {
      if (c[k] == 0) continue;
      for (int i = 0; i < a_; ++i) c[k - a_ + i] -= c[k] * phi_[i];
      c[k] = 0;
    }
    Elem r(a_);
    for (int i = 0; i < a_; ++i) r[i] = mod_floor(c[i], modulus_);
    return r;
  }
  [[nodiscard]] bool is_zero(const Elem& x) const {
    for (const auto& c : x)
      if (c != 0) return false;
    return true;
  }
  [[nodiscard]] Valuation valuation(const Elem& x) const {
    long best = m_;
    bool exact = false;
    for (const auto& c : x) {
      if (c == 0) continue;
      const long v = k3arith::valuation(c, p_);
      if (!exact || v < best) best = v;
      exact = true;
    }
    return {best, exact};
  }
  [[nodiscard]] bool is_unit(const Elem& x) const {
    for (const auto& c : x)
      if (mpz_fdiv_ui(c.get_mpz_t(), p_) != 0) return true;
    return false;
  }
  [[nodiscard]] Elem inverse(const Elem& x) const {
    if (!is_unit(x)) throw PreconditionError("element is not a unit");
    detail::FpPoly xbar(a_);
    for (int i = 0; i < a_; ++i) xbar[i] = mpz_fdiv_ui(x[i].get_mpz_t(), p_);
    detail::fp_trim(xbar);
    detail::FpPoly inv = detail::fp_field_inverse(xbar, phi_poly_, p_);
    Elem y = zero();
    for (std::size_t i = 0; i < inv.size(); ++i) y[i] = from_u64(inv[i]);
    // Newton: y <- y (2 - x y), doubling the correct digits each pass
    for (int correct = 1; correct < m_; correct *= 2) {
      y = mul(y, sub(from_integer(2), mul(x, y)));
    }
    return y;
  }
  [[nodiscard]] Elem divide_by_p_power(const Elem& x, long k) const {
    const Integer pk = ipow(p_, static_cast<unsigned long>(k));
    Elem r(a_);
    for (int i = 0; i < a_; ++i) mpz_divexact(r[i].get_mpz_t(), x[i].get_mpz_t(), pk.get_mpz_t());
    return r;
  }
  [[nodiscard]] Elem frobenius(const Elem& x) const {
    if (a_ == 1) return x;
    Elem r = zero();
    for (int i = 0; i < a_; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < a_; ++j) r[j] += x[i] * sigma_powers_[i][j];
    }
    for (auto& c : r) c = mod_floor(c, modulus_);
    return r;
  }
  /// sigma(t) as an element.
  [[nodiscard]] const Elem& sigma_of_t() const { return sigma_powers_[a_ > 1 ? 1 : 0]; }

 private:
  Elem power(Elem base, Integer e) const {
    Elem r = one();
    while (e > 0) {
      if (mpz_odd_p(e.get_mpz_t())) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  Elem eval_phi(const Elem& r) const {
    Elem acc = one();  // monic leading term, Horner from the top
    for (int i = a_ - 1; i >= 0; --i) acc = add(mul(acc, r), from_integer(phi_[i]));
    return acc;
  }
  Elem eval_phi_prime(const Elem& r) const {
    Elem acc = from_integer(a_);
    for (int i = a_ - 1; i >= 1; --i)
      acc = add(mul(acc, r), from_integer(phi_[i] * i));
    return acc;
  }
  void compute_sigma() {
    sigma_powers_.clear();
    if (a_ == 1) {
      sigma_powers_.push_back(one());
      return;
    }
    Elem t = zero();
    t[1] = 1;
    Elem r = power(t, from_u64(p_));
    for (int guard = 0; guard < 128 && !is_zero(eval_phi(r)); ++guard) {
      r = sub(r, mul(eval_phi(r), inverse(eval_phi_prime(r))));
    }
    if (!is_zero(eval_phi(r))) throw std::logic_error("Frobenius lift did not converge");
    Elem acc = one();
    for (int i = 0; i < a_; ++i) {
      sigma_powers_.push_back(acc);
      acc = mul(acc, r);
    }
  }

  std::uint64_t p_;
  int a_;
  int m_;
  Integer modulus_;
  std::vector<Integer> phi_;
  detail::FpPoly phi_poly_;
  std::vector<Elem> sigma_powers_;
};

namespace detail {

/// Z/p^M with GMP residues; the a = 1 counterpart of BigWittRing.
class BigResidueRing {
 public:
  using Elem = Integer;
  BigResidueRing(std::uint64_t p, int precision)
      : p_(p), m_(precision), modulus_(ipow(p, static_cast<unsigned long>(precision))) {}

  [[nodiscard]] std::uint64_t prime() const { return p_; }
  [[nodiscard]] int precision() const { return m_; }
  [[nodiscard]] Elem zero() const { return 0; }
  [[nodiscard]] Elem one() const { return modulus_ == 1 ? Integer(0) : Integer(1); }
  [[nodiscard]] Elem from_coefficients(const std::vector<Integer>& c) const {
    return mod_floor(c.at(0), modulus_);
  }
  [[nodiscard]] std::vector<Integer> coefficients(const Elem& x) const { return {x}; }
  [[nodiscard]] Elem add(const Elem& x, const Elem& y) const {
    Integer r = x + y;
    if (r >= modulus_) r -= modulus_;
    return r;
  }
  [[nodiscard]] Elem sub(const Elem& x, const Elem& y) const {
    Integer r = x - y;
    if (r < 0) r += modulus_;
    return r;
  }
  [[nodiscard]] Elem neg(const Elem& x) const { return sub(0, x); }
  [[nodiscard]] Elem mul(const Elem& x, const Elem& y) const { return mod_floor(x * y, modulus_); }
  [[nodiscard]] bool is_zero(const Elem& x) const { return x == 0; }
  [[nodiscard]] Valuation valuation(const Elem& x) const {
    if (x == 0) return {m_, false};
    return {k3arith::valuation(x, p_), true};
  }
  [[nodiscard]] bool is_unit(const Elem& x) const { return mpz_fdiv_ui(x.get_mpz_t(), p_) != 0; }
  [[nodiscard]] Elem inverse(const Elem& x) const {
    Integer r;
    if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t()) == 0)
      throw PreconditionError("element is not a unit");
    return r;
  }
  [[nodiscard]] Elem divide_by_p_power(const Elem& x, long k) const {
    Integer r;
    const Integer pk = ipow(p_, static_cast<unsigned long>(k));
    mpz_divexact(r.get_mpz_t(), x.get_mpz_t(), pk.get_mpz_t());
    return r;
  }
  [[nodiscard]] Elem frobenius(const Elem& x) const { return x; }

 private:
  std::uint64_t p_;
  int m_;
  Integer modulus_;
};

}  // namespace detail

/// W_m(F_{p^a}) with residues below 2^63. Value type; shares immutable
/// per-(p, a, m) tables.
class WittRing {
 public:
  using Elem = std::array<std::uint64_t, kMaxResidueDegree>;

  WittRing(std::uint64_t p, int a, int precision) : data_(lookup(p, a, precision)) {}

  [[nodiscard]] std::uint64_t prime() const { return data_->base.prime(); }
  [[nodiscard]] int degree() const { return data_->a; }
  [[nodiscard]] int precision() const { return data_->base.precision(); }
  [[nodiscard]] std::uint64_t modulus() const { return data_->base.modulus(); }
  [[nodiscard]] const ResidueRing& base() const { return data_->base; }
  [[nodiscard]] const std::vector<std::uint64_t>& phi() const { return data_->phi; }

  [[nodiscard]] Elem zero() const { return Elem{}; }
  [[nodiscard]] Elem one() const { return from_int(1); }
  [[nodiscard]] Elem from_int(std::int64_t x) const {
    Elem e{};
    e[0] = data_->base.from_int(x);
    return e;
  }
  [[nodiscard]] Elem from_integer(const Integer& x) const {
    Elem e{};
    e[0] = data_->base.from_integer(x);
    return e;
  }
  [[nodiscard]] Elem from_coefficients(const std::vector<Integer>& c) const {
    if (static_cast<int>(c.size()) > degree())
      throw PreconditionError("too many Witt coefficients for residue degree " +
                              std::to_string(degree()));
    Elem e{};
    for (std::size_t i = 0; i < c.size(); ++i) e[i] = data_->base.from_integer(c[i]);
    return e;
  }
  [[nodiscard]] Elem add(const Elem& x, const Elem& y) const {
    Elem r{};
    for (int i = 0; i < degree(); ++i) r[i] = data_->base.add(x[i], y[i]);
    return r;
  }
  [[nodiscard]] Elem sub(const Elem& x, const Elem& y) const {
    Elem r{};
    for (int i = 0; i < degree(); ++i) r[i] = data_->base.sub(x[i], y[i]);
    return r;
  }
  [[nodiscard]] Elem neg(const Elem& x) const { return sub(zero(), x); }
  [[nodiscard]] Elem mul(const Elem& x, const Elem& y) const {
    const int a = degree();
    const std::uint64_t mod = modulus();
    if (a == 1) return Elem{detail::mulmod(x[0], y[0], mod)};
    std::array<std::uint64_t, 2 * kMaxResidueDegree> c{};
    for (int i = 0; i < a; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < a; ++j)
        c[i + j] = data_->base.add(c[i + j], detail::mulmod(x[i], y[j], mod));
    }
    const auto& phi = data_->phi;
    for (int k = 2 * a - 2; k >= a; --k) {
      if (c[k] == 0) continue;
      for (int i = 0; i < a; ++i)
        c[k - a + i] = data_->base.sub(c[k - a + i], detail::mulmod(c[k], phi[i], mod));
      c[k] = 0;
    }
    Elem r{};
    for (int i = 0; i < a; ++i) r[i] = c[i];
    return r;
  }
  [[nodiscard]] bool is_zero(const Elem& x) const {
    for (int i = 0; i < degree(); ++i)
      if (x[i] != 0) return false;
    return true;
  }
  [[nodiscard]] Valuation valuation(const Elem& x) const {
    Valuation best{precision(), false};
    for (int i = 0; i < degree(); ++i) {
      const Valuation v = data_->base.valuation(x[i]);
      if (v.exact && (!best.exact || v.value < best.value)) best = v;
    }
    return best;
  }
  [[nodiscard]] bool is_unit(const Elem& x) const {
    for (int i = 0; i < degree(); ++i)
      if (x[i] % prime() != 0) return true;
    return false;
  }
  [[nodiscard]] Elem inverse(const Elem& x) const {
    if (!is_unit(x)) throw PreconditionError("element is not a unit");
    return from_big(data_->big.inverse(to_big(x)));
  }
  [[nodiscard]] Elem divide_by_p_power(const Elem& x, long k) const {
    Elem r = x;
    for (int i = 0; i < degree(); ++i) r[i] = data_->base.divide_by_p_power(x[i], k);
    return r;
  }
  [[nodiscard]] Elem frobenius(const Elem& x) const {
    const int a = degree();
    if (a == 1) return x;
    Elem r{};
    for (int i = 0; i < a; ++i) {
      if (x[i] == 0) continue;
      const Elem& s = data_->sigma_powers[i];
      for (int j = 0; j < a; ++j)
        r[j] = data_->base.add(r[j], detail::mulmod(x[i], s[j], modulus()));
    }
    return r;
  }
  [[nodiscard]] std::vector<Integer> lift(const Elem& x) const {
    std::vector<Integer> c;
    for (int i = 0; i < degree(); ++i) c.push_back(from_u64(x[i]));
    return c;
  }
  [[nodiscard]] WittRing truncated(int precision) const {
    return WittRing(prime(), degree(), precision);
  }
  [[nodiscard]] Elem reduce_to(const Elem& x, const WittRing& lower) const {
    Elem r{};
    for (int i = 0; i < degree(); ++i) r[i] = x[i] % lower.modulus();
    return r;
  }
  [[nodiscard]] std::string element_string(const Elem& x) const {
    if (degree() == 1) return std::to_string(x[0]);
    std::string s = "[";
    for (int i = 0; i < degree(); ++i) {
      if (i) s += ",";
      s += std::to_string(x[i]);
    }
    return s + "]";
  }

  friend bool operator==(const WittRing& a, const WittRing& b) {
    return a.data_ == b.data_;
  }

 private:
  struct Data {
    ResidueRing base;
    int a;
    std::vector<std::uint64_t> phi;
    std::vector<Elem> sigma_powers;
    BigWittRing big;
  };

  [[nodiscard]] BigWittRing::Elem to_big(const Elem& x) const {
    return data_->big.from_coefficients(lift(x));
  }
  [[nodiscard]] Elem from_big(const BigWittRing::Elem& x) const {
    Elem e{};
    for (int i = 0; i < degree(); ++i) e[i] = to_u64(x[i]);
    return e;
  }

  static std::shared_ptr<const Data> lookup(std::uint64_t p, int a, int m) {
    if (a < 1 || a > kMaxResidueDegree)
      throw PreconditionError("residue degree must lie in [1, " +
                              std::to_string(kMaxResidueDegree) + "]");
    static std::mutex mutex;
    static std::map<std::tuple<std::uint64_t, int, int>, std::shared_ptr<const Data>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(p, a, m);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ResidueRing base(p, m);
    BigWittRing big(p, a, m);
    auto d = std::make_shared<Data>(Data{base, a, {}, {}, big});
    for (const auto& c : big.phi()) d->phi.push_back(to_u64(c));
    // sigma(t)^i for i < a
    BigWittRing::Elem acc = big.one();
    BigWittRing::Elem st = big.frobenius([&] {
      auto t = big.zero();
      if (a > 1) t[1] = 1;
      return t;
    }());
    for (int i = 0; i < a; ++i) {
      Elem e{};
      for (int j = 0; j < a; ++j) e[j] = to_u64(acc[j]);
      d->sigma_powers.push_back(e);
      acc = big.mul(acc, st);
    }
    cache.emplace(key, d);
    return d;
  }

  std::shared_ptr<const Data> data_;
};

/// Element of W_m(F_{p^a}); mixed-precision arithmetic truncates to the
/// smaller precision.
class WittElem {
 public:
  WittElem(const WittRing& ring, const WittRing::Elem& coeffs) : ring_(ring), c_(coeffs) {}
  WittElem(const WittRing& ring, const std::vector<Integer>& coeffs)
      : ring_(ring), c_(ring.from_coefficients(coeffs)) {}

  [[nodiscard]] const WittRing& ring() const { return ring_; }
  [[nodiscard]] const WittRing::Elem& coefficients() const { return c_; }

  [[nodiscard]] WittElem truncated(int precision) const {
    if (precision >= ring_.precision()) return *this;
    WittRing lower = ring_.truncated(precision);
    return {lower, ring_.reduce_to(c_, lower)};
  }

  [[nodiscard]] WittElem frobenius() const { return {ring_, ring_.frobenius(c_)}; }
  [[nodiscard]] Valuation valuation() const { return ring_.valuation(c_); }
  [[nodiscard]] bool is_unit() const { return ring_.is_unit(c_); }
  [[nodiscard]] WittElem inverse() const { return {ring_, ring_.inverse(c_)}; }

  friend WittElem operator+(const WittElem& x, const WittElem& y) {
    auto [a, b] = common(x, y);
    return {a.ring_, a.ring_.add(a.c_, b.c_)};
  }
  friend WittElem operator-(const WittElem& x, const WittElem& y) {
    auto [a, b] = common(x, y);
    return {a.ring_, a.ring_.sub(a.c_, b.c_)};
  }
  friend WittElem operator*(const WittElem& x, const WittElem& y) {
    auto [a, b] = common(x, y);
    return {a.ring_, a.ring_.mul(a.c_, b.c_)};
  }
  friend bool operator==(const WittElem& x, const WittElem& y) {
    auto [a, b] = common(x, y);
    return a.c_ == b.c_;
  }

 private:
  static std::pair<WittElem, WittElem> common(const WittElem& x, const WittElem& y) {
    if (x.ring_.prime() != y.ring_.prime() || x.ring_.degree() != y.ring_.degree())
      throw PreconditionError("mismatched Witt rings");
    const int m = std::min(x.ring_.precision(), y.ring_.precision());
    return {x.truncated(m), y.truncated(m)};
  }

  WittRing ring_;
  WittRing::Elem c_;
};

/// The Frobenius lift sigma on W_m(F_{p^a}).
inline WittElem witt_frobenius(const WittElem& w) { return w.frobenius(); }

}  // namespace k3arith
