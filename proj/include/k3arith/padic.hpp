#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "k3arith/errors.hpp"
#include "k3arith/integers.hpp"

namespace k3arith {

/// v_p of a truncated quantity: either exact, or only known to be >= value
/// because the quantity vanishes at the working precision.
struct Valuation {
  long value = 0;
  bool exact = true;

  friend bool operator==(const Valuation&, const Valuation&) = default;
  [[nodiscard]] std::string str() const {
    return exact ? std::to_string(value) : ">= " + std::to_string(value);
  }
};

inline std::ostream& operator<<(std::ostream& os, const Valuation& v) {
  return os << v.str();
}

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

}  // namespace detail

/// The ring Z/p^m. Elements are residues in [0, p^m); p^m must stay below 2^63.
class ResidueRing {
 public:
  using Elem = std::uint64_t;

  ResidueRing() = default;
  ResidueRing(std::uint64_t p, int precision) : p_(p), m_(precision) {
    require_prime(p);
    if (precision < 1) throw PreconditionError("precision must be positive");
    unsigned __int128 mod = 1;
    for (int i = 0; i < precision; ++i) {
      mod *= p;
      if (mod >= (static_cast<unsigned __int128>(1) << 63)) {
        throw PreconditionError("p^m = " + std::to_string(p) + "^" +
                                std::to_string(precision) +
                                " exceeds the 63-bit residue range");
      }
    }
    modulus_ = static_cast<std::uint64_t>(mod);
  }

  [[nodiscard]] std::uint64_t prime() const { return p_; }
  [[nodiscard]] int precision() const { return m_; }
  [[nodiscard]] std::uint64_t modulus() const { return modulus_; }

  [[nodiscard]] Elem zero() const { return 0; }
  [[nodiscard]] Elem one() const { return 1 % modulus_; }
  [[nodiscard]] Elem from_int(std::int64_t x) const {
    const auto mod = static_cast<std::int64_t>(modulus_);
    std::int64_t r = x % mod;
    return static_cast<Elem>(r < 0 ? r + mod : r);
  }
  [[nodiscard]] Elem from_integer(const Integer& x) const {
    return to_u64(mod_floor(x, from_u64(modulus_)));
  }
  [[nodiscard]] Elem add(Elem a, Elem b) const {
    Elem s = a + b;
    return s >= modulus_ ? s - modulus_ : s;
  }
  [[nodiscard]] Elem sub(Elem a, Elem b) const {
    return a >= b ? a - b : a + (modulus_ - b);
  }
  [[nodiscard]] Elem neg(Elem a) const { return a == 0 ? 0 : modulus_ - a; }
  [[nodiscard]] Elem mul(Elem a, Elem b) const { return detail::mulmod(a, b, modulus_); }
  [[nodiscard]] bool is_zero(Elem a) const { return a == 0; }

  [[nodiscard]] Valuation valuation(Elem a) const {
    if (a == 0) return {m_, false};
    long v = 0;
    while (a % p_ == 0) {
      a /= p_;
      ++v;
    }
    return {v, true};
  }
  [[nodiscard]] bool is_unit(Elem a) const { return a % p_ != 0; }

  [[nodiscard]] Elem inverse(Elem a) const {
    if (!is_unit(a)) throw PreconditionError("element is not a unit");
    Integer r;
    Integer x = from_u64(a);
    Integer mod = from_u64(modulus_);
    mpz_invert(r.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t());
    return to_u64(r);
  }

  /// a / p^k, for a divisible by p^k (as an integer representative).
  [[nodiscard]] Elem divide_by_p_power(Elem a, long k) const {
    for (long i = 0; i < k; ++i) a /= p_;
    return a;
  }

  [[nodiscard]] Integer lift(Elem a) const { return from_u64(a); }

  /// Same prime at a lower precision.
  [[nodiscard]] ResidueRing truncated(int precision) const {
    return ResidueRing(p_, precision);
  }
  [[nodiscard]] Elem reduce_to(Elem a, const ResidueRing& lower) const {
    return a % lower.modulus_;
  }

  [[nodiscard]] std::string element_string(Elem a) const { return std::to_string(a); }

  friend bool operator==(const ResidueRing& a, const ResidueRing& b) {
    return a.p_ == b.p_ && a.m_ == b.m_;
  }

 private:
  std::uint64_t p_ = 2;
  int m_ = 1;
  std::uint64_t modulus_ = 2;
};

/// Truncated p-adic integer: a residue modulo p^m carrying (p, m).
/// Binary operations truncate to the smaller precision.
class PadicInt {
 public:
  PadicInt(std::uint64_t p, int precision, const Integer& value)
      : ring_(p, precision), value_(ring_.from_integer(value)) {}
  PadicInt(std::uint64_t p, int precision, std::int64_t value)
      : ring_(p, precision), value_(ring_.from_int(value)) {}
  PadicInt(const ResidueRing& ring, std::uint64_t residue)
      : ring_(ring), value_(residue % ring.modulus()) {}

  [[nodiscard]] std::uint64_t prime() const { return ring_.prime(); }
  [[nodiscard]] int precision() const { return ring_.precision(); }
  [[nodiscard]] std::uint64_t residue() const { return value_; }
  [[nodiscard]] const ResidueRing& ring() const { return ring_; }

  [[nodiscard]] PadicInt truncated(int precision) const {
    if (precision >= ring_.precision()) return *this;
    ResidueRing lower = ring_.truncated(precision);
    return PadicInt(lower, value_);
  }

  [[nodiscard]] bool is_unit() const { return ring_.is_unit(value_); }
  [[nodiscard]] PadicInt inverse() const { return {ring_, ring_.inverse(value_)}; }

  friend PadicInt operator+(const PadicInt& a, const PadicInt& b) {
    auto [x, y] = common(a, b);
    return {x.ring_, x.ring_.add(x.value_, y.value_)};
  }
  friend PadicInt operator-(const PadicInt& a, const PadicInt& b) {
    auto [x, y] = common(a, b);
    return {x.ring_, x.ring_.sub(x.value_, y.value_)};
  }
  friend PadicInt operator*(const PadicInt& a, const PadicInt& b) {
    auto [x, y] = common(a, b);
    return {x.ring_, x.ring_.mul(x.value_, y.value_)};
  }
  PadicInt operator-() const { return {ring_, ring_.neg(value_)}; }

  friend bool operator==(const PadicInt& a, const PadicInt& b) {
    auto [x, y] = common(a, b);
    return x.value_ == y.value_;
  }

 private:
  static std::pair<PadicInt, PadicInt> common(const PadicInt& a, const PadicInt& b) {
    if (a.prime() != b.prime()) throw PreconditionError("mismatched primes");
    const int m = std::min(a.precision(), b.precision());
    return {a.truncated(m), b.truncated(m)};
  }

  ResidueRing ring_;
  std::uint64_t value_;
};

/// v_p(x), or the marker ">= m" when x vanishes at precision m.
inline Valuation val_p(const PadicInt& x) { return x.ring().valuation(x.residue()); }

}  // namespace k3arith
