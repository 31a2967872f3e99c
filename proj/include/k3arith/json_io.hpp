#pragma once

// JSON forms of lattices, crystals, polygons, Clifford elements, formal group
// laws and their homomorphisms. Integers are written as JSON numbers when
// they fit in 64 bits and as decimal strings otherwise; both are accepted.

#include <cstdint>
#include <string>
#include <utility>

#include "json.hpp"

#include "k3arith/clifford.hpp"
#include "k3arith/errors.hpp"
#include "k3arith/fcrystal.hpp"
#include "k3arith/formalgroup.hpp"
#include "k3arith/integers.hpp"
#include "k3arith/lattice.hpp"

namespace k3arith::io {

using Json = nlohmann::json;

inline PreconditionError malformed(const std::string& what) {
  return PreconditionError("malformed input: " + what);
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw malformed(std::string("missing \"") + key + "\"");
  return j.at(key);
}

inline Json integer_to_json(const Integer& x) {
  if (mpz_fits_slong_p(x.get_mpz_t())) return x.get_si();
  return x.get_str();
}

inline Integer integer_from_json(const Json& j) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return from_u64(j.get<std::uint64_t>());
    return Integer(j.get<long>());
  }
  if (j.is_string()) {
    Integer x;
    if (x.set_str(j.get<std::string>(), 10) != 0) throw malformed("bad integer " + j.dump());
    return x;
  }
  throw malformed("expected an integer, got " + j.dump());
}

inline long long_from_json(const Json& j) { return to_long(integer_from_json(j)); }

inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const std::exception&) {
      throw malformed("bad rational " + j.dump());
    }
  }
  return Rational(integer_from_json(j));
}

inline Json matrix_to_json(const IntMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(integer_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline IntMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw malformed("expected a matrix");
  const std::size_t r = j.size();
  const std::size_t c = r ? j[0].size() : 0;
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!j[i].is_array() || j[i].size() != c) throw malformed("ragged matrix");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = integer_from_json(j[i][k]);
  }
  return m;
}

inline Json lattice_to_json(const QuadLattice& l) {
  return Json{{"rank", l.rank()}, {"gram", matrix_to_json(l.gram())}};
}

inline QuadLattice lattice_from_json(const Json& j) {
  const IntMatrix g = matrix_from_json(field(j, "gram"));
  if (j.contains("rank") && long_from_json(j["rank"]) != static_cast<long>(g.rows()))
    throw malformed("rank does not match the Gram matrix");
  if (g.rows() != g.cols()) throw malformed("Gram matrix is not square");
  return QuadLattice(g);
}

inline Json crystal_to_json(const FCrystal& c) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < c.rank(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < c.rank(); ++j) {
      const auto& e = c.entry(i, j);
      if (c.degree() == 1) {
        row.push_back(integer_to_json(e[0]));
      } else {
        Json coeffs = Json::array();
        for (const auto& x : e) coeffs.push_back(integer_to_json(x));
        row.push_back(std::move(coeffs));
      }
    }
    rows.push_back(std::move(row));
  }
  return Json{{"p", c.prime()},
              {"a", c.degree()},
              {"precision", c.precision()},
              {"rank", c.rank()},
              {"frobenius", std::move(rows)}};
}

inline FCrystal crystal_from_json(const Json& j) {
  const auto p = static_cast<std::uint64_t>(long_from_json(field(j, "p")));
  const int a = j.contains("a") ? static_cast<int>(long_from_json(j["a"])) : 1;
  const int m = static_cast<int>(long_from_json(field(j, "precision")));
  const Json& f = field(j, "frobenius");
  if (!f.is_array()) throw malformed("frobenius must be a matrix");
  const std::size_t r = f.size();
  if (j.contains("rank") && long_from_json(j["rank"]) != static_cast<long>(r))
    throw malformed("rank does not match the Frobenius matrix");
  Matrix<FCrystal::Entry> fm(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    if (!f[i].is_array() || f[i].size() != r) throw malformed("Frobenius matrix is not square");
    for (std::size_t k = 0; k < r; ++k) {
      const Json& e = f[i][k];
      FCrystal::Entry entry;
      if (e.is_array()) {
        for (const auto& x : e) entry.push_back(integer_from_json(x));
      } else {
        entry.push_back(integer_from_json(e));
      }
      fm(i, k) = std::move(entry);
    }
  }
  return FCrystal(p, a, m, std::move(fm));
}

inline Json polygon_to_json(const Polygon& poly) {
  Json slopes = Json::array();
  for (const auto& [s, mult] : poly.slopes())
    slopes.push_back(Json{{"num", s.get_num().get_si()}, {"den", s.get_den().get_si()}, {"mult", mult}});
  Json vertices = Json::array();
  for (const auto& [x, y] : poly.vertices()) vertices.push_back(Json::array({x, y.get_str()}));
  return Json{{"slopes", std::move(slopes)}, {"vertices", std::move(vertices)}};
}

inline Json element_to_json(const CliffordElement& x) {
  Json c = Json::object();
  for (const auto& [mask, v] : x.coefficients()) c[std::to_string(mask)] = v.get_str();
  return Json{{"coeffs", std::move(c)}};
}

inline CliffordElement element_from_json(const CliffordAlgebra& alg, const Json& j) {
  const Json& c = field(j, "coeffs");
  if (!c.is_object()) throw malformed("coeffs must be an object");
  CliffordElement::Coeffs coeffs;
  for (const auto& [key, v] : c.items()) {
    std::uint64_t mask = 0;
    try {
      std::size_t used = 0;
      mask = std::stoull(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw malformed("bad bitmask \"" + key + "\"");
    }
    if (alg.rank() < 64 && (mask >> alg.rank()) != 0)
      throw PreconditionError("bitmask " + key + " exceeds the rank");
    const Rational r = rational_from_json(v);
    if (sgn(r) != 0) coeffs[mask] += r;
  }
  return alg.element(std::move(coeffs));
}

using ResidueLaw = FormalGroupLaw<ResidueRing>;

inline Json fgl_to_json(const ResidueLaw& f) {
  Json coeffs = Json::object();
  const auto& r = f.ring();
  for (std::size_t d = 0; d < f.trunc(); ++d)
    for (std::size_t j = 0; j <= d; ++j) {
      const auto& c = f.coefficient(d - j, j);
      if (!r.is_zero(c)) coeffs[std::to_string(d - j) + "," + std::to_string(j)] = std::to_string(c);
    }
  return Json{{"p", f.prime()},
              {"precision", f.precision()},
              {"trunc", f.trunc()},
              {"F", std::move(coeffs)}};
}

inline std::pair<std::size_t, std::size_t> exponent_pair(const std::string& key) {
  const auto comma = key.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(key);
    std::size_t u1 = 0, u2 = 0;
    const std::string a = key.substr(0, comma), b = key.substr(comma + 1);
    const auto i = std::stoull(a, &u1);
    const auto j = std::stoull(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(key);
    return {i, j};
  } catch (const std::exception&) {
    throw malformed("bad exponent pair \"" + key + "\"");
  }
}

inline ResidueLaw fgl_from_json(const Json& j) {
  const auto p = static_cast<std::uint64_t>(long_from_json(field(j, "p")));
  const int m = static_cast<int>(long_from_json(field(j, "precision")));
  const auto n = static_cast<std::size_t>(long_from_json(field(j, "trunc")));
  const ResidueRing ring(p, m);
  BivariateSeries<ResidueRing> f(ring, n);
  const Json& c = field(j, "F");
  if (!c.is_object()) throw malformed("F must be an object");
  for (const auto& [key, v] : c.items()) {
    const auto [a, b] = exponent_pair(key);
    if (a + b >= n) throw malformed("coefficient " + key + " beyond the truncation");
    f.at(a, b) = ring.from_integer(integer_from_json(v));
  }
  return ResidueLaw(std::move(f));
}

inline Json hom_to_json(const PowerSeries<ResidueRing>& phi) {
  Json c = Json::object();
  for (std::size_t i = 0; i < phi.trunc(); ++i)
    if (!phi.ring().is_zero(phi[i])) c[std::to_string(i)] = std::to_string(phi[i]);
  return Json{{"phi", std::move(c)}};
}

}  // namespace k3arith::io
