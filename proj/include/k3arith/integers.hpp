#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "k3arith/errors.hpp"

namespace k3arith {

using Integer = mpz_class;
using Rational = mpq_class;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline void require_prime(std::uint64_t p) {
  if (!is_prime(p)) {
    throw PreconditionError("p = " + std::to_string(p) + " is not prime");
  }
}

inline Integer ipow(const Integer& base, unsigned long exponent) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
  return r;
}

inline Integer ipow(std::uint64_t base, unsigned long exponent) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exponent);
  return r;
}

/// p-adic valuation of a nonzero integer.
inline long valuation(const Integer& x, std::uint64_t p) {
  if (x == 0) throw PreconditionError("valuation of zero");
  if (p == 2) return static_cast<long>(mpz_scan1(x.get_mpz_t(), 0));
  Integer pp(static_cast<unsigned long>(p));
  Integer rest;
  return static_cast<long>(
      mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t()));
}

inline long valuation(const Rational& x, std::uint64_t p) {
  if (x == 0) throw PreconditionError("valuation of zero");
  return valuation(x.get_num(), p) - valuation(x.get_den(), p);
}

/// Non-negative representative of x mod m.
inline Integer mod_floor(const Integer& x, const Integer& m) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline std::uint64_t to_u64(const Integer& x) {
  if (x < 0 || mpz_sizeinbase(x.get_mpz_t(), 2) > 64) {
    throw PreconditionError("integer does not fit in 64 bits: " + x.get_str());
  }
  return static_cast<std::uint64_t>(mpz_get_ui(x.get_mpz_t()));
}

inline Integer from_u64(std::uint64_t x) {
  return Integer(static_cast<unsigned long>(x));
}

/// Image of a p-integral rational in Z/modulus.
inline Integer reduce_rational(const Rational& x, const Integer& modulus) {
  Integer inv;
  if (mpz_invert(inv.get_mpz_t(), x.get_den().get_mpz_t(),
                 modulus.get_mpz_t()) == 0) {
    throw PreconditionError("denominator not invertible modulo " +
                            modulus.get_str());
  }
  return mod_floor(x.get_num() * inv, modulus);
}

/// "a" or "a/b" in lowest terms.
inline std::string to_string(const Rational& x) { return x.get_str(); }

inline Rational parse_rational(std::string_view text) {
  Rational r;
  if (r.set_str(std::string(text), 10) != 0) {
    throw PreconditionError("not a rational number: " + std::string(text));
  }
  if (r.get_den() == 0) throw PreconditionError("zero denominator");
  r.canonicalize();
  return r;
}

inline Rational floor_rational(const Rational& x) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return Rational(q);
}

inline Rational ceil_rational(const Rational& x) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return Rational(q);
}

inline long to_long(const Integer& x) {
  if (!x.fits_slong_p()) throw PreconditionError("integer out of range");
  return x.get_si();
}

}  // namespace k3arith
