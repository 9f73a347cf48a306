#ifndef PATCHWORK_JSON_IO_HPP
#define PATCHWORK_JSON_IO_HPP

// Canonical JSON for the library types: rationals as "num/den" strings,
// exponents as {"rat", "irr"}, series as degree -> coefficient maps.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "patchwork/berkovich.hpp"
#include "patchwork/local_isotropy.hpp"
#include "patchwork/patching.hpp"
#include "patchwork/quadratic_forms.hpp"

namespace patchwork {

using Json = nlohmann::json;

/// Malformed payload: usage error rather than a mathematical one.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace json {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline Rational rational(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw SchemaError("rational expected as a string, got " + j.dump());
  try {
    return parse_rational(j.get<std::string>());
  } catch (const PreconditionError&) {
    throw SchemaError("not a rational: " + j.dump());
  }
}

inline Json to_json(const Rational& q) { return to_string(q); }
inline Json to_json(const Integer& z) { return to_long(z); }

inline Json to_json(const Exponent& e) { return {{"rat", to_string(e.rat)}, {"irr", to_string(e.irr)}}; }

inline Exponent exponent(const Json& j) {
  if (j.is_object()) return Exponent(rational(field(j, "rat")), j.contains("irr") ? rational(j.at("irr")) : Rational(0));
  return Exponent(rational(j));
}

inline Json to_json(const std::optional<Exponent>& e) { return e ? to_json(*e) : Json(nullptr); }

// declared up front so that array_of sees every overload
inline Json to_json(const BerkPoint& x);
inline Json to_json(const Disc& d);
inline Json to_json(const SwissCheese& s);
inline Json to_json(const AffinoidDomain& d);
inline Json to_json(const AnnulusSeries& s);
inline Json to_json(const Matrix2& m);
inline Json to_json(const TraceStep& t);
inline Json to_json(const RationalFunction& f);
inline Json to_json(const LocalBlock& b);
inline Json to_json(const MonomialElement& m);
inline Json to_json(const IterationStep& st);
inline Json to_json(const SideFactor& f);

template <class T>
Json array_of(const std::vector<T>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(to_json(x));
  return out;
}

inline std::vector<Rational> rationals(const Json& j) {
  if (!j.is_array()) throw SchemaError("array of rationals expected");
  std::vector<Rational> out;
  for (const auto& x : j) out.push_back(rational(x));
  return out;
}

// ---------------------------------------------------------------- geometry

inline Json to_json(const BerkPoint& x) {
  Json j;
  if (x.infinity) {
    j["infinity"] = true;
  } else {
    j["center"] = to_string(x.center);
  }
  if (x.log_radius) j["log_radius"] = to_json(*x.log_radius);
  return j;
}

inline BerkPoint point(const Json& j) {
  if (!j.is_object()) throw SchemaError("point must be an object");
  BerkPoint x;
  x.infinity = j.value("infinity", false);
  x.center = x.infinity ? Rational(0) : rational(field(j, "center"));
  if (j.contains("log_radius") && !j.at("log_radius").is_null()) x.log_radius = exponent(j.at("log_radius"));
  return x;
}

inline Json to_json(const Disc& d) { return {{"center", to_string(d.center)}, {"log_radius", to_json(d.log_radius)}}; }
inline Disc disc(const Json& j) { return Disc{rational(field(j, "center")), exponent(field(j, "log_radius"))}; }

inline Json to_json(const SwissCheese& s) {
  Json holes = Json::array();
  for (const auto& h : s.holes) holes.push_back(to_json(h));
  return {{"outer", s.outer ? to_json(*s.outer) : Json(nullptr)}, {"holes", holes}};
}

inline SwissCheese cheese(const Json& j) {
  SwissCheese s;
  if (j.contains("outer") && !j.at("outer").is_null()) s.outer = disc(j.at("outer"));
  if (j.contains("holes"))
    for (const auto& h : j.at("holes")) s.holes.push_back(disc(h));
  return s;
}

inline Json to_json(const AffinoidDomain& d) {
  Json pieces = Json::array();
  for (const auto& s : d.pieces) pieces.push_back(to_json(s));
  return {{"pieces", pieces}};
}

/// Either {"pieces": [...]} or a single cheese.
inline AffinoidDomain domain(const Json& j) {
  if (!j.is_object()) throw SchemaError("domain must be an object");
  AffinoidDomain d;
  if (j.contains("pieces")) {
    for (const auto& s : j.at("pieces")) d.pieces.push_back(cheese(s));
  } else {
    d.pieces.push_back(cheese(j));
  }
  return d;
}

inline std::vector<AffinoidDomain> domains(const Json& j) {
  if (!j.is_array()) throw SchemaError("array of domains expected");
  std::vector<AffinoidDomain> out;
  for (const auto& d : j) out.push_back(domain(d));
  return out;
}

inline Json to_json(const NiceCover& c) {
  Json j{{"elements", array_of(c.elements)}, {"intersection_points", array_of(c.intersection_points)}};
  j["parity"] = c.parity ? Json(*c.parity) : Json(nullptr);
  return j;
}

inline NiceCover cover(const Json& j) {
  NiceCover c;
  c.elements = domains(field(j, "elements"));
  if (j.contains("intersection_points"))
    for (const auto& x : j.at("intersection_points")) c.intersection_points.push_back(point(x));
  if (j.contains("parity") && !j.at("parity").is_null()) c.parity = j.at("parity").get<std::vector<int>>();
  return c;
}

// ---------------------------------------------------------------- series

inline Json to_json(const AnnulusSeries& s) {
  Json terms = Json::object();
  for (const auto& [d, c] : s.terms()) terms[std::to_string(d)] = to_string(c);
  return {{"terms", terms}, {"text", to_string(s)}};
}

/// A string such as "t^-1 + 5 + t", or {"terms": {"-1": "1", ...}}.
inline AnnulusSeries series(const Json& j, const SeriesContext& ctx) {
  if (j.is_string()) return parse_series(ctx, j.get<std::string>());
  const Json& terms = field(j, "terms");
  AnnulusSeries::Terms t;
  for (const auto& [k, v] : terms.items()) {
    try {
      t[std::stoi(k)] = rational(v);
    } catch (const std::logic_error&) {
      throw SchemaError("bad series degree \"" + k + "\"");
    }
  }
  return AnnulusSeries(ctx, t);
}

inline SeriesVector series_vector(const Json& j, const SeriesContext& ctx) {
  if (!j.is_array()) throw SchemaError("array of series expected");
  SeriesVector out;
  for (const auto& x : j) out.push_back(series(x, ctx));
  return out;
}

inline Json to_json(const Matrix2& m) {
  return Json::array({Json::array({to_json(m.e[0]), to_json(m.e[1])}), Json::array({to_json(m.e[2]), to_json(m.e[3])})});
}

inline Matrix2 matrix(const Json& j, const SeriesContext& ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 || j[1].size() != 2)
    throw SchemaError("matrix must be [[a, b], [c, d]]");
  return Matrix2{std::array<AnnulusSeries, 4>{series(j[0][0], ctx), series(j[0][1], ctx), series(j[1][0], ctx),
                                              series(j[1][1], ctx)}};
}

// ---------------------------------------------------------------- forms and certificates

inline Json to_json(const TraceStep& t) { return {{"step", t.step}, {"detail", t.detail}}; }

inline Json to_json(const IsotropyCertificate& c, bool trace) {
  Json j{{"verdict", to_string(c.verdict)},
         {"witness_exact", c.witness_exact},
         {"lift_precision", c.lift_precision},
         {"guaranteed_without_witness", c.guaranteed_without_witness},
         {"residue_witness", c.residue_witness}};
  j["witness"] = c.witness ? array_of(*c.witness) : Json(nullptr);
  if (trace) j["trace"] = array_of(c.trace);
  return j;
}

inline IsotropyCertificate isotropy_certificate(const Json& j) {
  IsotropyCertificate c;
  std::string v = field(j, "verdict").get<std::string>();
  c.verdict = v == "isotropic" ? Verdict::isotropic : v == "anisotropic" ? Verdict::anisotropic : Verdict::inconclusive;
  if (j.contains("witness") && !j.at("witness").is_null()) c.witness = rationals(j.at("witness"));
  c.witness_exact = j.value("witness_exact", false);
  c.lift_precision = j.value("lift_precision", 0L);
  return c;
}

inline Json to_json(const RationalFunction& f) { return to_string(f); }

inline RationalFunction rational_function(const Json& j) {
  if (j.is_number_integer()) return RationalFunction(j.get<long>());
  if (!j.is_string()) throw SchemaError("rational function expected as a string");
  return parse_rational_function(j.get<std::string>());
}

inline Json to_json(const LocalBlock& b) {
  return {{"scale", b.scale},
          {"members", b.members},
          {"residue_coeffs", b.residue_coeffs},
          {"verdict", to_string(b.verdict)},
          {"guaranteed_without_witness", b.guaranteed_without_witness}};
}

inline Json to_json(const LocalIsotropyCertificate& c, bool trace) {
  Json j{{"verdict", to_string(c.verdict)},
         {"point_type", c.point_type},
         {"value_group_rank", c.value_group_rank},
         {"residue_field", c.residue_field},
         {"blocks", array_of(c.blocks)},
         {"guaranteed_without_witness", c.guaranteed_without_witness},
         {"residue_witness", c.residue_witness}};
  j["witness"] = c.witness ? array_of(*c.witness) : Json(nullptr);
  j["hensel_index"] = c.hensel_index ? Json(*c.hensel_index) : Json(nullptr);
  j["defect_log_norm"] = to_json(c.defect_log_norm);
  j["leading_log_norm"] = to_json(c.leading_log_norm);
  j["residue_certificate"] = c.residue_certificate ? to_json(*c.residue_certificate, false) : Json(nullptr);
  if (trace) j["trace"] = array_of(c.trace);
  return j;
}

inline LocalIsotropyCertificate local_certificate(const Json& j) {
  LocalIsotropyCertificate c;
  std::string v = field(j, "verdict").get<std::string>();
  c.verdict = v == "isotropic" ? Verdict::isotropic : v == "anisotropic" ? Verdict::anisotropic : Verdict::inconclusive;
  if (j.contains("witness") && !j.at("witness").is_null()) {
    std::vector<RationalFunction> w;
    for (const auto& x : j.at("witness")) w.push_back(rational_function(x));
    c.witness = w;
  }
  return c;
}

inline Json to_json(const MonomialElement& m) { return {{"unit", to_string(m.unit)}, {"value", array_of(m.value.coords)}}; }

inline MonomialElement monomial(const Json& j) {
  return MonomialElement{rational(field(j, "unit")), ValueVector(rationals(field(j, "value")))};
}

template <class Elem>
Json to_json(const BlockDecomposition<Elem>& d) {
  Json blocks = Json::array(), certs = Json::array();
  for (const auto& b : d.blocks)
    blocks.push_back({{"scale", to_json(b.scale)}, {"units", array_of(b.units)}, {"members", b.members}});
  for (const auto& c : d.certificates)
    certs.push_back({{"block", c.block}, {"unit", to_json(c.unit)}, {"root", to_json(c.root)}});
  return {{"blocks", blocks}, {"certificates", certs}};
}

template <class Elem, class Read>
BlockDecomposition<Elem> decomposition(const Json& j, Read read) {
  BlockDecomposition<Elem> d;
  for (const auto& b : field(j, "blocks")) {
    Block<Elem> blk;
    blk.scale = read(field(b, "scale"));
    for (const auto& u : field(b, "units")) blk.units.push_back(read(u));
    blk.members = field(b, "members").get<std::vector<std::size_t>>();
    d.blocks.push_back(blk);
  }
  for (const auto& c : field(j, "certificates"))
    d.certificates.push_back({field(c, "block").get<std::size_t>(), read(field(c, "unit")), read(field(c, "root"))});
  return d;
}

// ---------------------------------------------------------------- patching

inline Json to_json(const IterationStep& st) {
  return {{"s", st.s},
          {"u", to_json(st.u)},
          {"v", to_json(st.v)},
          {"du", to_json(st.du)},
          {"dv", to_json(st.dv)},
          {"residual", to_json(st.residual)},
          {"bound_size", st.bound_size},
          {"bound_increment", st.bound_increment},
          {"bound_residual", st.bound_residual}};
}

inline Json to_json(const IterationTrace& t) {
  const auto& k = t.constants;
  return {{"constants",
           {{"M", to_string(k.M)}, {"d", to_string(k.d)}, {"delta", to_string(k.delta)}, {"eps_prime", to_string(k.eps_prime)},
            {"eps", to_string(k.eps)}}},
          {"steps", array_of(t.steps)},
          {"all_bounds_hold", t.all_bounds_hold()}};
}

inline Json to_json(const SideFactor& f) {
  return {{"center", to_string(f.center)},
          {"log_radius", to_json(f.log_radius)},
          {"side", f.disc_side ? "disc" : "outer"},
          {"matrix", to_json(f.m)}};
}

inline SideFactor side_factor(const Json& j, long p, long precision) {
  SideFactor f;
  f.center = rational(field(j, "center"));
  f.log_radius = exponent(field(j, "log_radius"));
  std::string side = field(j, "side").get<std::string>();
  if (side != "disc" && side != "outer") throw SchemaError("side must be \"disc\" or \"outer\"");
  f.disc_side = side == "disc";
  f.m = matrix(field(j, "matrix"), detail::point_context(p, f.log_radius, precision));
  return f;
}

}  // namespace json
}  // namespace patchwork

#endif  // PATCHWORK_JSON_IO_HPP
