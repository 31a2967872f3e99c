#pragma once

// Command-line front end. run() parses argv-style arguments, reads JSON from
// --in or the given stream, and writes a report. Exit codes: 0 success,
// 1 failed self test, 2 precondition violation, 3 precision failure,
// 64 usage error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "k3arith/clifford.hpp"
#include "k3arith/errors.hpp"
#include "k3arith/fcrystal.hpp"
#include "k3arith/formalgroup.hpp"
#include "k3arith/json_io.hpp"
#include "k3arith/lattice.hpp"
#include "k3arith/linalg.hpp"

namespace k3arith::cli {

using io::Json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitPrecision = 3;
inline constexpr int kExitUsage = 64;

struct Options {
  bool json = false;
  std::uint64_t seed = 0;
  int trials = 10;
  int precision = 12;
  std::size_t trunc = 64;
  bool trunc_given = false;
  std::string in_path;
};

struct Context {
  Options opt;
  std::istream& in;
  std::ostream& out;
  std::ostream& err;

  [[nodiscard]] Json input() const {
    std::string text;
    if (!opt.in_path.empty()) {
      std::ifstream f(opt.in_path);
      if (!f) throw PreconditionError("cannot read " + opt.in_path);
      text.assign(std::istreambuf_iterator<char>(f), {});
    } else {
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw io::malformed(text.empty() ? "no input" : e.what());
    }
  }

  void emit(const Json& j, const std::string& text) const {
    if (opt.json)
      out << j.dump() << "\n";
    else
      out << text;
  }
};

namespace detail {

/// "U+U+E8+span2d:3" and the like.
inline QuadLattice lattice_from_spec(const std::string& spec) {
  QuadLattice acc;
  std::stringstream ss(spec);
  std::string part;
  bool any = false;
  while (std::getline(ss, part, '+')) {
    any = true;
    if (part.rfind("span2d:", 0) == 0) {
      long d = 0;
      try {
        d = std::stol(part.substr(7));
      } catch (const std::exception&) {
        throw PreconditionError("bad lattice summand: " + part);
      }
      acc = direct_sum(acc, span2d(d));
    } else {
      acc = direct_sum(acc, standard_lattice(part));
    }
  }
  if (!any) throw PreconditionError("empty lattice description");
  return acc;
}

inline QuadLattice lattice_input(const Json& j) {
  if (j.is_object() && j.contains("lattice")) return io::lattice_from_json(j["lattice"]);
  return io::lattice_from_json(j);
}

inline std::string matrix_text(const IntMatrix& m, const std::string& indent = "  ") {
  std::string s;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    s += indent;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) s += " ";
      s += m(i, j).get_str();
    }
    s += "\n";
  }
  return s;
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline std::vector<Rational> parse_vector(const std::string& text) {
  std::vector<Rational> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) v.push_back(parse_rational(part));
  return v;
}

/// First isotropic standard basis vector.
inline std::vector<Rational> default_isotropic(const QuadLattice& l) {
  for (std::size_t i = 0; i < l.rank(); ++i)
    if (l.gram()(i, i) == 0) {
      std::vector<Rational> e(l.rank(), Rational(0));
      e[i] = 1;
      return e;
    }
  throw PreconditionError("no isotropic basis vector; pass --e");
}

inline std::string polygon_text(const Polygon& p) {
  std::string s = p.str() + "\nvertices";
  for (const auto& [x, y] : p.vertices()) s += " (" + std::to_string(x) + "," + y.get_str() + ")";
  return s + "\n";
}

inline std::string hom_text(const PowerSeries<ResidueRing>& phi) {
  std::string s;
  for (std::size_t i = 0; i < phi.trunc(); ++i) {
    if (phi.ring().is_zero(phi[i])) continue;
    if (!s.empty()) s += " + ";
    s += std::to_string(phi[i]) + "*x^" + std::to_string(i);
  }
  return (s.empty() ? "0" : s) + " + O(x^" + std::to_string(phi.trunc()) + ")\n";
}

inline std::string height_text(const HeightResult& h) { return "height " + h.str() + "\n"; }

inline Json height_json(const HeightResult& h) {
  Json j{{"text", h.str()}, {"lower_bound", h.lower_bound}};
  j["height"] = h.height ? Json(*h.height) : Json(nullptr);
  return j;
}

// ---- lattice ----

inline Json embed_report(long d, std::uint64_t p) {
  const auto e = embed_into_selfdual(d, p);
  const auto sig = signature(e.ambient);
  Json divisors = Json::array();
  for (const auto& x : e.embedding.elementary_divisors()) divisors.push_back(io::integer_to_json(x));
  return Json{{"d", d},
              {"p", p},
              {"det", io::integer_to_json(discriminant(e.ambient))},
              {"expected_det", 4 * d * static_cast<long>(p) - 1},
              {"signature", Json::array({sig.positive, sig.negative})},
              {"even", e.ambient.is_even()},
              {"self_dual_at_p", is_self_dual_at(e.ambient, p)},
              {"primitive", e.embedding.is_primitive()},
              {"elementary_divisors", divisors},
              {"lattice", io::lattice_to_json(e.lattice)},
              {"ambient", io::lattice_to_json(e.ambient)},
              {"embedding", io::matrix_to_json(e.embedding.matrix())}};
}

inline int lattice_build(const Context& ctx, const std::string& name) {
  const auto l = lattice_from_spec(name);
  ctx.emit(io::lattice_to_json(l),
           "rank " + std::to_string(l.rank()) + "\ngram\n" + matrix_text(l.gram()));
  return kExitOk;
}

inline int lattice_disc(const Context& ctx, std::uint64_t p) {
  const auto l = lattice_input(ctx.input());
  const Integer det = discriminant(l);
  const auto group = discriminant_group(l);
  Json g = Json::array();
  std::string gt;
  for (const auto& x : group) {
    g.push_back(io::integer_to_json(x));
    gt += " Z/" + x.get_str();
  }
  Json j{{"det", io::integer_to_json(det)}, {"discriminant_group", g}};
  std::string text = "det " + det.get_str() + "\ndiscriminant group" + (gt.empty() ? " 0" : gt) + "\n";
  if (p) {
    j["self_dual_at_p"] = is_self_dual_at(l, p);
    text += "self-dual at " + std::to_string(p) + ": " + bool_text(is_self_dual_at(l, p)) + "\n";
  }
  ctx.emit(j, text);
  return kExitOk;
}

inline int lattice_signature(const Context& ctx) {
  const auto l = lattice_input(ctx.input());
  const auto s = signature(l);
  ctx.emit(Json{{"positive", s.positive}, {"negative", s.negative}, {"even", l.is_even()}},
           "signature (" + std::to_string(s.positive) + "," + std::to_string(s.negative) +
               ")\neven " + bool_text(l.is_even()) + "\n");
  return kExitOk;
}

inline int lattice_embed(const Context& ctx, long d, std::uint64_t p) {
  const Json r = embed_report(d, p);
  std::string text = "d " + std::to_string(d) + ", p " + std::to_string(p) + "\n";
  text += "det " + r["det"].dump() + " (4dp-1 = " + r["expected_det"].dump() + ")\n";
  text += "signature (" + r["signature"][0].dump() + "," + r["signature"][1].dump() + ")\n";
  text += "even " + r["even"].dump() + "\nself-dual at p " + r["self_dual_at_p"].dump() + "\n";
  text += "primitive=" + r["primitive"].dump() + "\n";
  ctx.emit(r, text);
  return kExitOk;
}

inline int lattice_complement(const Context& ctx) {
  const Json j = ctx.input();
  const auto ambient = io::lattice_from_json(io::field(j, "ambient"));
  const SublatticeEmbedding sub(ambient, io::matrix_from_json(io::field(j, "embedding")));
  const auto comp = orthogonal_complement(sub);
  const Integer det = comp.sub().rank() ? discriminant(comp.sub()) : Integer(1);
  ctx.emit(Json{{"ambient", io::lattice_to_json(ambient)},
                {"embedding", io::matrix_to_json(comp.matrix())},
                {"lattice", io::lattice_to_json(comp.sub())},
                {"det", io::integer_to_json(det)},
                {"primitive", comp.is_primitive()}},
           "complement rank " + std::to_string(comp.sub().rank()) + ", det " + det.get_str() +
               "\ngram\n" + matrix_text(comp.sub().gram()) + "basis (columns)\n" +
               matrix_text(comp.matrix()));
  return kExitOk;
}

// ---- clifford ----

inline QuadLattice clifford_lattice(const Context& ctx, const std::string& spec) {
  if (!spec.empty()) return lattice_from_spec(spec);
  return lattice_input(ctx.input());
}

inline int clifford_pi_check(const Context& ctx, const std::string& spec, std::uint64_t p) {
  const CliffordAlgebra alg(clifford_lattice(ctx, spec));
  const Projector pi(alg);
  std::mt19937_64 rng(ctx.opt.seed);
  const auto rep = check_projector(pi, rng, ctx.opt.trials);
  Json j{{"rank", alg.rank()},
         {"fixes_i_M", rep.fixes_vectors},
         {"idempotent", rep.idempotent},
         {"kernel_orthogonal", rep.kernel_orthogonal},
         {"image_rank", rep.image_rank},
         {"passed", rep.passed()},
         {"witnesses", rep.witnesses},
         {"seed", ctx.opt.seed},
         {"trials", ctx.opt.trials}};
  j["hyperbolic_agrees"] = rep.hyperbolic_agrees ? Json(*rep.hyperbolic_agrees) : Json(nullptr);
  std::string text = "rank " + std::to_string(alg.rank()) + "\n";
  text += "pi fixes i(M): " + bool_text(rep.fixes_vectors) + "\n";
  text += "idempotent: " + bool_text(rep.idempotent) + "\n";
  text += "kernel orthogonal to i(M): " + bool_text(rep.kernel_orthogonal) + "\n";
  text += "hyperbolic formula: " +
          (rep.hyperbolic_agrees ? bool_text(*rep.hyperbolic_agrees) : std::string("n/a")) + "\n";
  if (p) {
    const long k = pi.integrality_exponent(p);
    j["integrality_exponent"] = k;
    text += "p^" + std::to_string(k) + " pi is integral at p = " + std::to_string(p) + "\n";
  }
  for (const auto& w : rep.witnesses) text += "  " + w + "\n";
  ctx.emit(j, text);
  return rep.passed() ? kExitOk : kExitFailed;
}

inline int clifford_filtration(const Context& ctx, const std::string& spec, const std::string& e_text) {
  const auto l = clifford_lattice(ctx, spec);
  const auto e = e_text.empty() ? default_isotropic(l) : parse_vector(e_text);
  if (e.size() != l.rank()) throw PreconditionError("vector length must equal rank");
  const RationalMatrix gram = to_rational(l.gram());
  Json j{{"rank", l.rank()}};
  std::string text = "rank " + std::to_string(l.rank()) + "\n";
  const std::uint64_t structural = structural_filtration_dimension(gram, e);
  j["structural_dimension"] = structural;
  text += "monomials in i(e)Cl: " + std::to_string(structural) + "\n";
  if (l.rank() <= kMaxDenseCliffordRank) {
    const CliffordAlgebra alg(gram);
    const auto fil = isotropic_filtration(alg, e);
    const auto rep = filtration_compatibility_check(alg, e);
    j["image_dimension"] = fil.on_clifford.at(0).cols();
    j["lattice_dimensions"] = {fil.on_lattice.at(-1).cols(), fil.on_lattice.at(0).cols(),
                               fil.on_lattice.at(1).cols()};
    j["clauses"] = {{"lattice_to_operators", rep.lattice_to_operators},
                    {"parity", rep.parity},
                    {"right_action", rep.right_action},
                    {"projector", rep.projector}};
    j["passed"] = rep.passed();
    j["witnesses"] = rep.witnesses;
    text += "dim i(e)Cl: " + std::to_string(fil.on_clifford.at(0).cols()) + "\n";
    text += "Fil on M: " + std::to_string(fil.on_lattice.at(-1).cols()) + " > " +
            std::to_string(fil.on_lattice.at(0).cols()) + " > " +
            std::to_string(fil.on_lattice.at(1).cols()) + "\n";
    text += "i(Fil M) in Fil End: " + bool_text(rep.lattice_to_operators) + "\n";
    text += "parity projectors: " + bool_text(rep.parity) + "\n";
    text += "right multiplication: " + bool_text(rep.right_action) + "\n";
    text += "pi: " + bool_text(rep.projector) + "\n";
    for (const auto& w : rep.witnesses) text += "  " + w + "\n";
    ctx.emit(j, text);
    return rep.passed() ? kExitOk : kExitFailed;
  }
  text += "rank above " + std::to_string(kMaxDenseCliffordRank) + ": dense checks skipped\n";
  ctx.emit(j, text);
  return kExitOk;
}

inline int clifford_gspin(const Context& ctx, const std::string& spec) {
  const Json j = ctx.input();
  const QuadLattice l = spec.empty() ? io::lattice_from_json(io::field(j, "lattice"))
                                     : lattice_from_spec(spec);
  const CliffordAlgebra alg(l);
  const Json& ej = j.contains("element") ? j["element"] : j;
  const auto g = io::element_from_json(alg, ej);
  const auto v = gspin_membership(alg, g);
  Json r{{"member", v.member}, {"reason", v.reason}};
  std::string text = "member " + bool_text(v.member) + "\n";
  if (!v.member) text += "reason: " + v.reason + "\n";
  if (v.member) {
    Json action = Json::array();
    for (std::size_t i = 0; i < v.action.rows(); ++i) {
      Json row = Json::array();
      for (std::size_t k = 0; k < v.action.cols(); ++k) row.push_back(v.action(i, k).get_str());
      action.push_back(row);
    }
    r["action"] = action;
  }
  ctx.emit(r, text);
  return kExitOk;
}

// ---- crystal ----

inline int crystal_k3_model(const Context& ctx, int h, bool supersingular, bool naive, std::uint64_t p) {
  if (!supersingular && h == 0) throw PreconditionError("give --h or --supersingular");
  FCrystal c = naive ? naive_companion_crystal(h, p, ctx.opt.precision)
                     : k3_model_crystal(supersingular ? std::nullopt : std::optional<int>(h), p,
                                        ctx.opt.precision);
  std::string text = "rank " + std::to_string(c.rank()) + ", p " + std::to_string(p) +
                     ", precision " + std::to_string(c.precision()) + "\n" +
                     matrix_text(c.integer_matrix());
  ctx.emit(io::crystal_to_json(c), text);
  return kExitOk;
}

inline int crystal_polygon(const Context& ctx, bool newton) {
  const auto c = io::crystal_from_json(ctx.input());
  const Polygon p = newton ? newton_polygon(c) : hodge_polygon(c);
  ctx.emit(io::polygon_to_json(p), polygon_text(p));
  return kExitOk;
}

inline int crystal_katz(const Context& ctx) {
  const auto rep = katz_check(io::crystal_from_json(ctx.input()));
  Json j{{"passed", rep.passed},
         {"endpoints_match", rep.endpoints_match},
         {"newton", io::polygon_to_json(rep.newton)},
         {"hodge", io::polygon_to_json(rep.hodge)},
         {"message", rep.message}};
  j["violation"] = rep.violation ? Json(*rep.violation) : Json(nullptr);
  ctx.emit(j, "Newton " + rep.newton.str() + "\nHodge " + rep.hodge.str() + "\nKatz " +
                  (rep.passed ? "passed" : "failed") + ": " + rep.message + "\n");
  return kExitOk;
}

inline int crystal_k3_check(const Context& ctx) {
  const auto v = check_k3_crystal(io::crystal_from_json(ctx.input()));
  std::string kind;
  switch (v.kind) {
    case K3Verdict::Kind::FiniteHeight: kind = "finite-height"; break;
    case K3Verdict::Kind::Supersingular: kind = "supersingular"; break;
    case K3Verdict::Kind::NotK3Shaped: kind = "not-k3"; break;
  }
  Json j{{"verdict", kind},
         {"reason", v.reason},
         {"newton", io::polygon_to_json(v.newton)},
         {"hodge", io::polygon_to_json(v.hodge)}};
  j["height"] = v.kind == K3Verdict::Kind::FiniteHeight ? Json(v.height) : Json(nullptr);
  std::string text = "verdict " + kind;
  if (v.kind == K3Verdict::Kind::FiniteHeight) text += ", height " + std::to_string(v.height);
  text += "\nNewton " + v.newton.str() + "\nHodge " + v.hodge.str() + "\n";
  if (!v.reason.empty()) text += "reason: " + v.reason + "\n";
  ctx.emit(j, text);
  return kExitOk;
}

inline int crystal_decompose(const Context& ctx, const std::string& slope) {
  const auto c = io::crystal_from_json(ctx.input());
  const auto d = slope_decompose(c, parse_rational(slope));
  const auto ns = newton_polygon(d.sub), nq = newton_polygon(d.quotient);
  ctx.emit(Json{{"sub", io::crystal_to_json(d.sub)},
                {"quotient", io::crystal_to_json(d.quotient)},
                {"basis", io::matrix_to_json(d.basis)},
                {"newton_sub", io::polygon_to_json(ns)},
                {"newton_quotient", io::polygon_to_json(nq)},
                {"power", d.iterations}},
           "sub rank " + std::to_string(d.sub.rank()) + ", Newton " + ns.str() +
               "\nquotient rank " + std::to_string(d.quotient.rank()) + ", Newton " + nq.str() +
               "\nseparated at F^" + std::to_string(d.iterations) + "\n");
  return kExitOk;
}

// ---- fgl ----

inline int fgl_build(const Context& ctx, const std::string& law, int h, std::uint64_t p) {
  const ResidueRing ring(p, ctx.opt.precision);
  io::ResidueLaw f = law == "honda"            ? honda_law(h, ring, ctx.opt.trunc)
                     : law == "multiplicative" ? multiplicative_law(ring, ctx.opt.trunc)
                     : law == "additive"       ? additive_law(ring, ctx.opt.trunc)
                                               : throw PreconditionError("unknown law: " + law);
  std::string text;
  for (std::size_t d = 0; d < f.trunc(); ++d)
    for (std::size_t j = 0; j <= d; ++j) {
      const auto c = f.coefficient(d - j, j);
      if (c == 0) continue;
      text += "  x^" + std::to_string(d - j) + " y^" + std::to_string(j) + ": " + std::to_string(c) + "\n";
    }
  ctx.emit(io::fgl_to_json(f), "F mod " + std::to_string(p) + "^" + std::to_string(ctx.opt.precision) +
                                   ", trunc " + std::to_string(f.trunc()) + "\n" + text);
  return kExitOk;
}

inline int fgl_height(const Context& ctx) {
  const auto h = height(io::fgl_from_json(ctx.input()));
  ctx.emit(height_json(h), height_text(h));
  return kExitOk;
}

inline int fgl_p_series(const Context& ctx) {
  const auto s = p_series(io::fgl_from_json(ctx.input()));
  ctx.emit(io::hom_to_json(s), "[p](x) = " + hom_text(s));
  return kExitOk;
}

struct LiftTrial {
  WittScalar a, b;
  bool hom = true, composition = true, additivity = true, reduction = true;
  [[nodiscard]] bool passed() const { return hom && composition && additivity && reduction; }
};

/// Honda height-h lift over W(F_{p^h})/p^m with random scalars a, b:
/// [a] is a homomorphism, [a] o [b] = [ab], F([a],[b]) = [a+b], and [a]
/// reduces to an endomorphism mod p.
inline std::vector<LiftTrial> lift_trials(int h, std::uint64_t p, int m, std::size_t n,
                                          std::uint64_t seed, int trials) {
  const WittRing w(p, h, m);
  const auto f = honda_law(h, w, n);
  std::mt19937_64 rng(seed);
  const Integer mod = ipow(p, static_cast<unsigned long>(m));
  std::vector<LiftTrial> out;
  for (int t = 0; t < trials; ++t) {
    LiftTrial tr;
    for (int i = 0; i < h; ++i) {
      tr.a.push_back(from_u64(rng() % to_u64(mod)));
      tr.b.push_back(from_u64(rng() % to_u64(mod)));
    }
    const auto fa = a_series(f, tr.a, false);
    const auto fb = a_series(f, tr.b, false);
    tr.hom = fa.is_homomorphism();
    tr.composition = a_series(f, scalar_mul(w, tr.a, tr.b), false).phi == fa.phi.compose(fb.phi);
    tr.additivity = a_series(f, scalar_add(tr.a, tr.b), false).phi == f.series().evaluate(fa.phi, fb.phi);
    tr.reduction = reduction_commutes(fa).commutes;
    out.push_back(std::move(tr));
  }
  return out;
}

inline std::string scalar_text(const WittScalar& s) {
  std::string t = "[";
  for (std::size_t i = 0; i < s.size(); ++i) t += (i ? "," : "") + s[i].get_str();
  return t + "]";
}

inline int fgl_lift_check(const Context& ctx, int h, std::uint64_t p) {
  require_prime(p);
  std::size_t n = ctx.opt.trunc;
  if (!ctx.opt.trunc_given) n = to_u64(ipow(p, static_cast<unsigned long>(2 * h))) + 1;
  const auto trials = lift_trials(h, p, ctx.opt.precision, n, ctx.opt.seed, ctx.opt.trials);
  bool ok = true;
  Json arr = Json::array();
  std::string text = "Honda height " + std::to_string(h) + " lift over W(F_" + std::to_string(p) +
                     "^" + std::to_string(h) + ")/" + std::to_string(p) + "^" +
                     std::to_string(ctx.opt.precision) + ", N = " + std::to_string(n) + "\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& tr = trials[t];
    ok = ok && tr.passed();
    Json a = Json::array(), b = Json::array();
    for (const auto& x : tr.a) a.push_back(io::integer_to_json(x));
    for (const auto& x : tr.b) b.push_back(io::integer_to_json(x));
    arr.push_back(Json{{"a", a},
                       {"b", b},
                       {"homomorphism", tr.hom},
                       {"composition", tr.composition},
                       {"additivity", tr.additivity},
                       {"reduction_commutes", tr.reduction}});
    text += "  a=" + scalar_text(tr.a) + " b=" + scalar_text(tr.b) + ": " +
            (tr.passed() ? "ok" : "FAILED (reproduce with --seed " + std::to_string(ctx.opt.seed) +
                                      ", trial " + std::to_string(t) + ")") +
            "\n";
  }
  ctx.emit(Json{{"p", p}, {"h", h}, {"precision", ctx.opt.precision}, {"trunc", n},
                {"seed", ctx.opt.seed}, {"trials", arr}, {"passed", ok}},
           text + (ok ? "all trials passed\n" : "some trials failed\n"));
  return ok ? kExitOk : kExitFailed;
}

// ---- selftest ----

inline int selftest(const Context& ctx) {
  struct Row {
    std::string name;
    bool ok;
    std::string detail;
  };
  std::vector<Row> rows;
  auto check = [&](const std::string& name, const std::function<std::string()>& body) {
    try {
      const std::string failure = body();
      rows.push_back({name, failure.empty(), failure});
    } catch (const std::exception& e) {
      rows.push_back({name, false, e.what()});
    }
  };
  const std::uint64_t seed = ctx.opt.seed;
  const int trials = ctx.opt.trials;

  check("K3 lattice: even, det -1, signature (19,3)", [] {
    const auto k = k3_lattice();
    if (!k.is_even() || discriminant(k) != -1 || !(signature(k) == Signature{19, 3}))
      return std::string("invariants differ");
    return std::string();
  });
  check("embedding into a lattice self-dual at p", [] {
    for (long d = 1; d <= 5; ++d)
      for (std::uint64_t p : {2, 3, 5}) {
        const auto e = embed_into_selfdual(d, p);
        if (discriminant(e.ambient) != 4 * d * static_cast<long>(p) - 1 ||
            !(signature(e.ambient) == Signature{20, 2}) || !e.embedding.is_primitive())
          return "d=" + std::to_string(d) + " p=" + std::to_string(p);
      }
    return std::string();
  });
  check("complement of <2d> in K3 and double complement", [] {
    const auto k = k3_lattice();
    IntMatrix v(22, 1);
    v(16, 0) = 1;
    v(17, 0) = 3;
    const auto c = orthogonal_complement(SublatticeEmbedding(k, v));
    if (discriminant(c.sub()) != -6) return "det " + discriminant(c.sub()).get_str();
    const auto cc = orthogonal_complement(c);
    if (!(cc.sub() == QuadLattice(IntMatrix{{6}}))) return std::string("double complement differs");
    return std::string();
  });
  check("trace pairing is the quadratic form", [&] {
    std::mt19937_64 rng(seed);
    const CliffordAlgebra alg(direct_sum(hyperbolic_plane(), QuadLattice(IntMatrix{{2, 1}, {1, 2}})));
    std::uniform_int_distribution<int> d(-3, 3);
    for (int t = 0; t < trials; ++t) {
      RationalVector v(4), w(4);
      for (auto& x : v) x = d(rng);
      for (auto& x : w) x = d(rng);
      if (trace_pair(alg.lmul_operator(v), alg.lmul_operator(w)) != alg.pair(v, w))
        return "trial " + std::to_string(t) + " (seed " + std::to_string(seed) + ")";
    }
    return std::string();
  });
  check("projector pi at rank 4", [&] {
    std::mt19937_64 rng(seed);
    const CliffordAlgebra alg(direct_sum({hyperbolic_plane(), span2d(1), span2d(3)}));
    const auto rep = check_projector(Projector(alg), rng, std::min(trials, 5));
    return rep.passed() ? std::string() : rep.witnesses.front();
  });
  check("filtration compatibility at rank 4", [] {
    const CliffordAlgebra alg(direct_sum({hyperbolic_plane(), span2d(1), span2d(2)}));
    std::vector<Rational> e{1, 0, 0, 0};
    const auto rep = filtration_compatibility_check(alg, e);
    return rep.passed() ? std::string() : rep.witnesses.front();
  });
  check("i(e)Cl has dimension 2^21 at rank 22", [] {
    std::vector<Rational> e(22, Rational(0));
    e[16] = 1;
    const auto n = structural_filtration_dimension(to_rational(k3_lattice().gram()), e);
    return n == (std::uint64_t{1} << 21) ? std::string() : std::to_string(n);
  });
  check("GSpin rejects odd elements", [] {
    const CliffordAlgebra alg(direct_sum(hyperbolic_plane(), hyperbolic_plane()));
    const auto v = gspin_membership(alg, alg.generator(0) + alg.generator(1));
    return v.member ? std::string("odd element accepted") : std::string();
  });
  check("K3 model slope tables", [] {
    for (int h : {1, 2, 3, 5, 10})
      for (std::uint64_t p : {2, 3}) {
        const auto c = k3_model_crystal(h, p);
        if (!(newton_polygon(c) == k3_newton_table(h)) || !(hodge_polygon(c) == k3_hodge_table()))
          return "h=" + std::to_string(h) + " p=" + std::to_string(p);
      }
    return std::string();
  });
  check("Katz inequality on random crystals", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> e(0, 1000);
    std::uniform_int_distribution<int> v(0, 2);
    for (int t = 0; t < trials; ++t) {
      IntMatrix f(5, 5);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) f(i, j) = ipow(std::uint64_t{3}, v(rng)) * e(rng);
      const auto c = FCrystal::over_prime_field(3, 12, f);
      try {
        if (!katz_check(c).passed) return io::crystal_to_json(c).dump();
      } catch (const PrecisionError&) {
        continue;  // F not injective to this precision
      }
    }
    return std::string();
  });
  check("Hodge-Newton decomposition of a conjugated K3 model", [&] {
    std::mt19937_64 rng(seed);
    const auto c = base_change(k3_model_crystal(2, 3), linalg::random_unimodular(rng, 22));
    const auto d = slope_decompose(c, Rational(1));
    if (!(newton_polygon(d.sub) == Polygon({{Rational(1, 2), 2}})))
      return "sub Newton " + newton_polygon(d.sub).str();
    return std::string();
  });
  check("naive companion crystals are rejected", [] {
    for (int h : {2, 3})
      if (check_k3_crystal(naive_companion_crystal(h, 3)).kind != K3Verdict::Kind::NotK3Shaped)
        return "h=" + std::to_string(h);
    return std::string();
  });
  check("Honda law heights", [] {
    for (auto [p, h] : {std::pair<std::uint64_t, int>{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
      const std::size_t n = to_u64(ipow(p, static_cast<unsigned long>(h + 1))) + 1;
      const auto r = height(honda_law(h, ResidueRing(p, 2), n));
      if (r.height != std::optional<long>(h)) return "p=" + std::to_string(p) + " h=" + std::to_string(h);
    }
    return std::string();
  });
  check("Honda lift carries the Witt action", [&] {
    const auto tr = lift_trials(2, 2, 6, 17, seed, std::min(trials, 5));
    for (std::size_t t = 0; t < tr.size(); ++t)
      if (!tr[t].passed()) return "a=" + scalar_text(tr[t].a) + " b=" + scalar_text(tr[t].b);
    return std::string();
  });

  bool ok = true;
  Json arr = Json::array();
  std::string text;
  for (const auto& r : rows) {
    ok = ok && r.ok;
    arr.push_back(Json{{"check", r.name}, {"passed", r.ok}, {"detail", r.detail}});
    text += std::string(r.ok ? "PASS " : "FAIL ") + r.name + (r.ok ? "" : ": " + r.detail) + "\n";
  }
  ctx.emit(Json{{"seed", seed}, {"trials", trials}, {"checks", arr}, {"passed", ok}}, text);
  return ok ? kExitOk : kExitFailed;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"k3arith: lattices, Clifford algebras, F-crystals and formal groups", "k3arith"};
  app.set_help_flag("--help", "print help");  // -h would clash with --h
  app.require_subcommand(1);
  Options opt;
  if (const char* env = std::getenv("K3ARITH_SEED")) {
    try {
      opt.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "ignoring malformed K3ARITH_SEED\n";
    }
  }
  std::vector<std::pair<CLI::App*, std::function<int(const Context&)>>> leaves;
  auto common = [&](CLI::App* sub) {
    sub->add_flag("--json", opt.json, "machine-readable output");
    sub->add_option("--seed", opt.seed, "random seed (falls back to K3ARITH_SEED, then 0)");
    sub->add_option("--trials", opt.trials, "number of random trials")->check(CLI::NonNegativeNumber);
    sub->add_option("--precision", opt.precision, "p-adic precision m")->check(CLI::PositiveNumber);
    sub->add_option("--trunc", opt.trunc, "series truncation N")->check(CLI::PositiveNumber);
    sub->add_option("--in", opt.in_path, "read JSON input from a file instead of stdin");
    return sub;
  };
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  std::function<int(const Context&)> fn) {
    CLI::App* sub = common(parent->add_subcommand(name, help));
    leaves.emplace_back(sub, std::move(fn));
    return sub;
  };

  // lattice
  auto* lat = app.add_subcommand("lattice", "integral quadratic lattices");
  lat->require_subcommand(1);
  std::string lat_name;
  long d = 1;
  std::uint64_t p = 0;
  leaf(lat, "build", "build U, E8, K3, span2d:D or sums like U+U+E8",
       [&](const Context& c) { return detail::lattice_build(c, lat_name); })
      ->add_option("--name", lat_name, "lattice description")->required();
  leaf(lat, "disc", "determinant and discriminant group",
       [&](const Context& c) { return detail::lattice_disc(c, p); })
      ->add_option("--p", p, "also report self-duality at p");
  leaf(lat, "signature", "signature of the form", [&](const Context& c) { return detail::lattice_signature(c); });
  auto* embed = leaf(lat, "embed", "embed E8^2+U^2+<2d> into a lattice self-dual at p",
                     [&](const Context& c) { return detail::lattice_embed(c, d, p); });
  embed->add_option("--d", d, "d >= 1")->required();
  embed->add_option("--p", p, "prime")->required();
  leaf(lat, "complement", "orthogonal complement of {ambient, embedding}",
       [&](const Context& c) { return detail::lattice_complement(c); });

  // clifford
  auto* cl = app.add_subcommand("clifford", "Clifford algebra checks");
  cl->require_subcommand(1);
  std::string cl_lattice, e_text;
  std::uint64_t cl_p = 0;
  auto* pic = leaf(cl, "pi-check", "check the idempotent pi onto i(M)",
                   [&](const Context& c) { return detail::clifford_pi_check(c, cl_lattice, cl_p); });
  pic->add_option("--lattice", cl_lattice, "lattice description (else JSON input)");
  pic->add_option("--p", cl_p, "report the integrality exponent of pi at p");
  auto* fil = leaf(cl, "filtration", "filtrations induced by an isotropic vector",
                   [&](const Context& c) { return detail::clifford_filtration(c, cl_lattice, e_text); });
  fil->add_option("--lattice", cl_lattice, "lattice description (else JSON input)");
  fil->add_option("--e", e_text, "isotropic vector, comma separated");
  leaf(cl, "gspin", "GSpin membership of {lattice, element}",
       [&](const Context& c) { return detail::clifford_gspin(c, cl_lattice); })
      ->add_option("--lattice", cl_lattice, "lattice description (else the lattice field)");

  // crystal
  auto* cr = app.add_subcommand("crystal", "F-crystals and their polygons");
  cr->require_subcommand(1);
  int h = 0;
  bool supersingular = false, naive = false;
  std::uint64_t cp = 0;
  std::string slope = "1";
  auto* model = leaf(cr, "k3-model", "rank-22 model crystal of height h",
                     [&](const Context& c) { return detail::crystal_k3_model(c, h, supersingular, naive, cp); });
  model->add_option("--h", h, "height 1..10");
  model->add_flag("--supersingular", supersingular, "p times the identity");
  model->add_flag("--naive", naive, "the naive companion construction (not K3-shaped)");
  model->add_option("--p", cp, "prime")->required();
  leaf(cr, "newton", "Newton polygon", [&](const Context& c) { return detail::crystal_polygon(c, true); });
  leaf(cr, "hodge", "Hodge polygon", [&](const Context& c) { return detail::crystal_polygon(c, false); });
  leaf(cr, "katz", "Newton above Hodge with equal endpoints",
       [&](const Context& c) { return detail::crystal_katz(c); });
  leaf(cr, "k3-check", "classify a rank-22 crystal", [&](const Context& c) { return detail::crystal_k3_check(c); });
  leaf(cr, "decompose", "split off the slopes below --slope",
       [&](const Context& c) { return detail::crystal_decompose(c, slope); })
      ->add_option("--slope", slope, "breakpoint slope, e.g. 1 or 3/2");

  // fgl
  auto* fg = app.add_subcommand("fgl", "formal group laws");
  fg->require_subcommand(1);
  std::string law = "honda";
  int fh = 1;
  std::uint64_t fp = 0;
  auto* build = leaf(fg, "build", "law from a logarithm over Z/p^m",
                     [&](const Context& c) { return detail::fgl_build(c, law, fh, fp); });
  build->add_option("--law", law, "honda, multiplicative or additive");
  build->add_option("--h", fh, "height of the Honda law");
  build->add_option("--p", fp, "prime")->required();
  leaf(fg, "height", "height of the reduction mod p", [&](const Context& c) { return detail::fgl_height(c); });
  leaf(fg, "p-series", "[p](x)", [&](const Context& c) { return detail::fgl_p_series(c); });
  int lh = 2;
  std::uint64_t lp = 2;
  auto* lift = leaf(fg, "lift-check", "Witt action on the Honda lift and its reduction",
                    [&](const Context& c) { return detail::fgl_lift_check(c, lh, lp); });
  lift->add_option("--h", lh, "height");
  lift->add_option("--p", lp, "prime");

  leaf(&app, "selftest", "run the invariant suite", [&](const Context& c) { return detail::selftest(c); });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    // help for the innermost subcommand that was reached
    const CLI::App* deepest = &app;
    for (bool more = true; more;) {
      more = false;
      for (const auto* s : deepest->get_subcommands())
        if (s->parsed()) {
          deepest = s;
          more = true;
          break;
        }
    }
    err << deepest->help();
    return kExitUsage;
  }

  for (const auto& [sub, fn] : leaves) {
    if (!sub->parsed()) continue;
    for (const auto* o : sub->get_options())
      if (o->get_name() == "--trunc" && o->count() > 0) opt.trunc_given = true;
    const Context ctx{opt, in, out, err};
    try {
      return fn(ctx);
    } catch (const PrecisionError& e) {
      err << "precision error: " << e.what() << "\n";
      return kExitPrecision;
    } catch (const PreconditionError& e) {
      err << "error: " << e.what() << "\n";
      return kExitPrecondition;
    } catch (const CLI::ValidationError& e) {
      err << e.what() << "\n";
      return kExitUsage;
    }
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace k3arith::cli
