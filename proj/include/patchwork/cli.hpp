#ifndef PATCHWORK_CLI_HPP
#define PATCHWORK_CLI_HPP

// Command dispatch over JSON payloads and the golden-file suite runner.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "patchwork/json_io.hpp"

namespace patchwork {

struct CliOptions {
  long prime = 3;
  long precision = 64;
  unsigned long seed = 20240601;
  DecompositionMode mode = DecompositionMode::free;
  bool verify = false;
  bool trace = false;
};

struct CliResponse {
  int exit_code = 0;
  Json body;                             // {status, result, diagnostics}
  std::vector<std::string> trace_lines;  // per-iteration lines, printed on stderr
};

namespace cli {

struct Context {
  const Json& payload;
  const CliOptions& opts;
  std::vector<std::string> diagnostics;
  std::vector<std::string> trace_lines;
};

/// Replay mode: the certificate to check, when the payload carries one.
inline const Json* certificate(const Context& c) {
  if (!c.opts.verify) return nullptr;
  if (!c.payload.is_object() || !c.payload.contains("certificate"))
    throw SchemaError("--verify needs a \"certificate\" field holding a previous result");
  return &c.payload.at("certificate");
}

inline Json verified(bool ok, Json details = Json::object()) {
  details["verified"] = ok;
  return details;
}

inline SeriesContext series_context(const Context& c) {
  Exponent rho = Rational(1, 2);
  if (c.payload.is_object() && c.payload.contains("log_radius")) rho = json::exponent(c.payload.at("log_radius"));
  if (sign_of(rho) <= 0)
    throw PreconditionError("annulus log-radius must be positive");
  return SeriesContext{c.opts.prime, rho, static_cast<int>(std::max<long>(64, 4 * c.opts.precision)), std::nullopt};
}

inline void note_saturation(Context& c, const std::string& what, bool saturated) {
  if (saturated) c.diagnostics.push_back("window saturated: " + what);
}

// ---------------------------------------------------------------- quadratic forms

inline Json cmd_isotropy(Context& c) {
  const long p = c.opts.prime;
  require_odd_prime(p);
  const Json& coeffs = json::field(c.payload, "coeffs");
  if (!coeffs.is_array()) throw SchemaError("coeffs must be an array");
  if (c.payload.contains("point")) {
    std::vector<RationalFunction> fs;
    for (const auto& x : coeffs) fs.push_back(json::rational_function(x));
    DiagonalForm<RationalFunction> q(fs);
    BerkPoint x = json::point(c.payload.at("point"));
    if (const Json* cert = certificate(c)) return verified(verify_local_witness(q, x, p, json::local_certificate(*cert)));
    FieldProfile base{1, true, 2};
    auto cert = local_isotropy_at_point(q, x, p, base);
    if (cert.verdict == Verdict::inconclusive) c.diagnostics.push_back("inconclusive: no witness found below the dimension bound");
    return json::to_json(cert, c.opts.trace);
  }
  DiagonalForm<Rational> q(json::rationals(coeffs));
  if (const Json* cert = certificate(c)) return verified(verify_padic_witness(q, p, json::isotropy_certificate(*cert)));
  auto cert = isotropic_padic(q, p);
  if (cert.verdict == Verdict::inconclusive) c.diagnostics.push_back("inconclusive oracle");
  return json::to_json(cert, c.opts.trace);
}

inline Json cmd_decompose(Context& c) {
  const Json& coeffs = json::field(c.payload, "coeffs");
  if (!coeffs.is_array()) throw SchemaError("coeffs must be an array");
  bool monomial = !coeffs.empty() && coeffs.front().is_object();
  if (!monomial) {
    require_odd_prime(c.opts.prime);
    DiagonalForm<Rational> q(json::rationals(coeffs));
    if (const Json* cert = certificate(c))
      return verified(verify_decomposition(q, json::decomposition<Rational>(*cert, json::rational)));
    return json::to_json(unit_block_decomposition(q, c.opts.prime));
  }
  std::vector<MonomialElement> xs;
  for (const auto& x : coeffs) xs.push_back(json::monomial(x));
  DiagonalForm<MonomialElement> q(xs);
  std::size_t n = c.payload.contains("n") ? c.payload.at("n").get<std::size_t>() : xs.front().value.size();
  for (const auto& x : xs)
    if (x.value.size() < n) throw SchemaError("value vectors must have at least n coordinates");
  if (const Json* cert = certificate(c))
    return verified(verify_decomposition(q, json::decomposition<MonomialElement>(*cert, json::monomial)));
  return json::to_json(unit_block_decomposition(q, n, c.opts.mode));
}

inline Json cmd_ubound(Context& c) {
  FieldProfile f;
  f.n = json::field(c.payload, "n").get<long>();
  f.free = c.payload.value("free", true);
  f.residue_us = c.payload.value("residue_us", 2L);
  UBound b = u_bound(f);
  return {{"field", json::to_json(b.field_bound)},
          {"function_field", json::to_json(b.function_field_bound)},
          {"equality", b.equality}};
}

// ---------------------------------------------------------------- Berkovich line

inline Json cmd_classify(Context& c) {
  BerkPoint x = normalized(json::point(c.payload));
  return {{"type", classify_point(x)}, {"point", json::to_json(x)}};
}

inline AffinoidDomain union_of(const std::vector<AffinoidDomain>& ds) {
  AffinoidDomain u;
  for (const auto& d : ds) u.pieces.insert(u.pieces.end(), d.pieces.begin(), d.pieces.end());
  return u;
}

inline Json nice_report(const NiceReport& r) {
  return {{"nice", r.nice}, {"clause", r.clause}, {"message", r.message}, {"witnesses", r.witnesses}};
}

inline Json cmd_refine(Context& c) {
  const long p = c.opts.prime;
  auto ds = json::domains(json::field(c.payload, "domains"));
  AffinoidDomain target = union_of(ds);
  if (const Json* cert = certificate(c)) {
    auto r = is_nice_cover(json::cover(*cert).elements, target, p);
    return verified(r.nice, {{"report", nice_report(r)}});
  }
  NiceCover cover = nice_refinement(ds, p);
  Json out = json::to_json(cover);
  out["report"] = nice_report(is_nice_cover(cover.elements, target, p));
  return out;
}

inline bool parity_separates(const std::vector<AffinoidDomain>& elems, const std::vector<int>& bits, long p) {
  if (bits.size() != elems.size()) return false;
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = i + 1; j < elems.size(); ++j)
      if (meeting_point(detail::only_piece(elems[i], i), detail::only_piece(elems[j], j), p) && bits[i] == bits[j])
        return false;
  return true;
}

inline Json cmd_parity(Context& c) {
  const long p = c.opts.prime;
  NiceCover cover = json::cover(c.payload);
  if (const Json* cert = certificate(c))
    return verified(parity_separates(cover.elements, cert->at("parity").get<std::vector<int>>(), p));
  auto r = is_nice_cover(cover.elements, union_of(cover.elements), p);
  if (!r.nice) throw PreconditionError("cover is not nice: " + r.message);
  return {{"parity", parity_function(cover, p)}};
}

inline Json cmd_cover_with_s(Context& c) {
  const long p = c.opts.prime;
  AffinoidDomain a = json::domain(json::field(c.payload, "domain"));
  std::vector<BerkPoint> s;
  for (const auto& x : json::field(c.payload, "points")) s.push_back(json::point(x));
  if (const Json* cert = certificate(c)) {
    NiceCover cover = json::cover(*cert);
    auto r = is_nice_cover(cover.elements, a, p);
    auto pts = intersection_points(cover.elements, p);
    bool all = true;
    for (const auto& x : s) {
      bool found = false;
      for (const auto& y : pts) found = found || same_point(normalized(x), y, p);
      all = all && found;
    }
    return verified(r.nice && all, {{"report", nice_report(r)}, {"contains_points", all}});
  }
  NiceCover cover = cover_with_intersections(a, s, p);
  cover.parity = parity_function(cover, p);
  return json::to_json(cover);
}

// ---------------------------------------------------------------- patching

inline Json cmd_split(Context& c) {
  SeriesContext ctx = series_context(c);
  const Json& src = c.payload.is_object() ? json::field(c.payload, "series") : c.payload;
  AnnulusSeries f = json::series(src, ctx);
  if (const Json* cert = certificate(c)) {
    AnnulusSeries plus = json::series(json::field(*cert, "plus"), ctx), minus = json::series(json::field(*cert, "minus"), ctx);
    bool ok = (plus + minus - f).is_zero() && plus.minus_part().is_zero() && minus.plus_part().is_zero();
    return verified(ok);
  }
  AnnulusSplit s = laurent_split(f);
  Json out{{"plus", json::to_json(s.plus)}, {"minus", json::to_json(s.minus)}};
  auto val = [](const AnnulusSeries& x) { return x.is_zero() ? Json(nullptr) : json::to_json(x.valuation()); };
  out["log_norms"] = {{"input", val(f)}, {"plus", val(s.plus)}, {"minus", val(s.minus)}};
  return out;
}

inline GroupChart chart_of(const Json& payload) {
  std::string name = payload.value("chart", "gl1");
  if (name == "additive") return GroupChart::additive();
  if (name == "gl1") return GroupChart::gl1();
  if (name == "sl2") return GroupChart::sl2();
  throw SchemaError("chart must be one of additive, gl1, sl2");
}

inline Json trace_json(Context& c, const IterationTrace& t) {
  for (const auto& st : t.steps) c.trace_lines.push_back(to_string(st));
  Json j = json::to_json(t);
  if (!c.opts.trace) j.erase("steps");
  j["iterations"] = t.steps.size();
  return j;
}

inline Json cmd_approximate(Context& c) {
  SeriesContext ctx = series_context(c);
  PatchingProblem prob;
  prob.chart = chart_of(c.payload);
  prob.a = json::series_vector(json::field(c.payload, "a"), ctx);
  if (prob.a.size() != prob.chart.dim()) throw SchemaError("target has the wrong number of coordinates for the chart");
  if (c.payload.contains("d")) prob.d = json::rational(c.payload.at("d"));
  prob.precision = c.opts.precision;
  Exponent half(Rational(c.opts.precision, 2));
  if (const Json* cert = certificate(c)) {
    ApproximationResult r;
    r.u = json::series_vector(json::field(*cert, "u"), ctx);
    r.v = json::series_vector(json::field(*cert, "v"), ctx);
    if (r.u.size() != prob.chart.dim() || r.v.size() != prob.chart.dim()) throw SchemaError("u and v have the wrong length");
    bool supports = true;
    for (const auto& x : r.u) supports = supports && x.minus_part().is_zero();
    for (const auto& x : r.v) supports = supports && x.plus_part().is_zero();
    auto res = remultiplication_valuation(prob, r);
    return verified(supports && (!res || *res >= half), {{"supports", supports}, {"residual", json::to_json(res)}});
  }
  auto r = successive_approximation(prob);
  auto res = remultiplication_valuation(prob, r);
  for (const auto& x : r.u) note_saturation(c, "u", x.window_saturated());
  for (const auto& x : r.v) note_saturation(c, "v", x.window_saturated());
  return {{"u", json::array_of(r.u)},
          {"v", json::array_of(r.v)},
          {"trace", trace_json(c, r.trace)},
          {"residual", json::to_json(res)},
          {"residual_ok", !res || *res >= half}};
}

inline Json cmd_factor(Context& c) {
  SeriesContext ctx = series_context(c);
  Matrix2 g = json::matrix(json::field(c.payload, "matrix"), ctx);
  Exponent half(Rational(c.opts.precision, 2));
  if (const Json* cert = certificate(c)) {
    SeriesContext w = detail::working_context(ctx, c.opts.precision);
    w.cap.reset();
    Matrix2 g1 = json::matrix(json::field(*cert, "g1"), w), g2 = json::matrix(json::field(*cert, "g2"), w);
    bool supports = supported_in_nonnegative_degrees(g1) && outer_side_near_identity(g2);
    auto res = distance_valuation(g1 * g2, g.with_context(w));
    return verified(supports && (!res || *res >= half), {{"supports", supports}, {"residual", json::to_json(res)}});
  }
  auto f = factor_matrix(g, c.opts.precision);
  note_saturation(c, "g1", f.g1.saturated());
  note_saturation(c, "g2", f.g2.saturated());
  return {{"g1", json::to_json(f.g1)},
          {"g2", json::to_json(f.g2)},
          {"trace", trace_json(c, f.trace)},
          {"residual", json::to_json(f.residual)},
          {"supports", supported_in_nonnegative_degrees(f.g1) && outer_side_near_identity(f.g2)}};
}

inline Json check_json(const PointCheck& chk) {
  return {{"point", json::to_json(chk.point)},
          {"zero_side", chk.zero_side},
          {"one_side", chk.one_side},
          {"residual", json::to_json(chk.residual)}};
}

inline Json cmd_patch(Context& c) {
  const long p = c.opts.prime;
  require_odd_prime(p);
  NiceCover cover = json::cover(json::field(c.payload, "cover"));
  if (cover.intersection_points.empty()) cover.intersection_points = intersection_points(cover.elements, p);
  if (!cover.parity) cover.parity = parity_function(cover, p);
  const Json& ts = json::field(c.payload, "transitions");
  if (!ts.is_array()) throw SchemaError("transitions must be an array of matrices");
  if (ts.size() != cover.intersection_points.size())
    throw PreconditionError("one transition per intersection point is required (" +
                            std::to_string(cover.intersection_points.size()) + " points)");
  std::vector<Matrix2> transitions;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const BerkPoint& s = cover.intersection_points[i];
    if (!s.log_radius) throw PreconditionError("intersection points must be of type 3");
    transitions.push_back(json::matrix(ts[i], detail::point_context(p, *s.log_radius, c.opts.precision)));
  }
  auto check_list = [](const std::vector<PointCheck>& checks) {
    Json out = Json::array();
    for (const auto& chk : checks) out.push_back(check_json(chk));
    return out;
  };
  if (const Json* cert = certificate(c)) {
    std::vector<PatchedElement> elems;
    for (const auto& e : json::field(*cert, "elements")) {
      PatchedElement pe;
      for (const auto& f : json::field(e, "factors")) pe.factors.push_back(json::side_factor(f, p, c.opts.precision));
      elems.push_back(pe);
    }
    auto checks = check_patch(cover, transitions, elems, p, c.opts.precision);
    return verified(all_checks_hold(checks, c.opts.precision), {{"checks", check_list(checks)}});
  }
  auto r = patch_over_cover(cover, transitions, p, c.opts.precision, c.payload.value("root_last", false));
  Json elems = Json::array();
  for (const auto& e : r.elements) elems.push_back({{"factors", json::array_of(e.factors)}});
  Json order = Json::array();
  for (const auto& st : r.order) {
    Json j{{"index", st.index}};
    j["parent"] = st.parent ? Json(*st.parent) : Json(nullptr);
    j["via"] = st.via ? json::to_json(*st.via) : Json(nullptr);
    order.push_back(j);
  }
  if (!r.verified) c.diagnostics.push_back("patched elements miss a transition below precision N/2");
  return {{"cover", json::to_json(cover)},
          {"elements", elems},
          {"order", order},
          {"checks", check_list(r.checks)},
          {"verified", r.verified}};
}

// ---------------------------------------------------------------- dispatch

using Handler = Json (*)(Context&);

inline const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"isotropy", cmd_isotropy},       {"decompose", cmd_decompose}, {"ubound", cmd_ubound},
      {"classify", cmd_classify},       {"refine", cmd_refine},       {"parity", cmd_parity},
      {"cover-with-s", cmd_cover_with_s}, {"split", cmd_split},     {"approximate", cmd_approximate},
      {"factor", cmd_factor},           {"patch", cmd_patch}};
  return table;
}

inline std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : handlers()) out.push_back(k);
  return out;
}

inline CliResponse error_response(int code, const std::string& kind, const std::string& message) {
  CliResponse r;
  r.exit_code = code;
  r.body = {{"status", "error"}, {"result", {{"kind", kind}, {"message", message}}}, {"diagnostics", Json::array()}};
  return r;
}

}  // namespace cli

/// Routes one request. Exit code 0 on success, 1 when a mathematical
/// precondition fails (or a --verify replay is rejected), 2 on usage errors.
inline CliResponse dispatch(const std::string& command, const Json& payload, const CliOptions& opts) {
  auto it = cli::handlers().find(command);
  if (it == cli::handlers().end()) return cli::error_response(2, "usage", "unknown command \"" + command + "\"");
  if (opts.precision < 4) return cli::error_response(2, "usage", "precision must be at least 4");
  cli::Context ctx{payload, opts, {}, {}};
  try {
    Json result = it->second(ctx);
    CliResponse r;
    bool rejected = opts.verify && result.is_object() && result.contains("verified") && !result.at("verified").get<bool>();
    r.exit_code = rejected ? 1 : 0;
    r.body = {{"status", rejected ? "error" : "ok"}, {"result", result}, {"diagnostics", ctx.diagnostics}};
    r.trace_lines = std::move(ctx.trace_lines);
    return r;
  } catch (const SchemaError& e) {
    return cli::error_response(2, "schema", e.what());
  } catch (const Json::exception& e) {
    return cli::error_response(2, "schema", e.what());
  } catch (const PreconditionError& e) {
    return cli::error_response(1, "precondition", e.what());
  }
}

// ---------------------------------------------------------------- golden files

struct SuiteCase {
  std::string name;
  bool passed = false;
  std::string diff;
};

struct SuiteReport {
  std::vector<SuiteCase> cases;
  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.passed; }));
  }
  bool ok() const { return passed() == cases.size(); }
};

/// Request files carry {command, payload, options?}; expected files carry
/// {exit_code, response}. Options default to CliOptions.
inline CliOptions options_from(const Json& j, CliOptions base = {}) {
  if (!j.is_object()) return base;
  base.prime = j.value("prime", base.prime);
  base.precision = j.value("precision", base.precision);
  base.seed = j.value("seed", base.seed);
  base.verify = j.value("verify", base.verify);
  base.trace = j.value("trace", base.trace);
  if (j.contains("mode")) {
    std::string m = j.at("mode").get<std::string>();
    if (m != "free" && m != "general") throw SchemaError("mode must be free or general");
    base.mode = m == "free" ? DecompositionMode::free : DecompositionMode::general;
  }
  return base;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

inline CliResponse run_request(const Json& request) {
  if (!request.is_object() || !request.contains("command"))
    return cli::error_response(2, "schema", "request needs a \"command\" field");
  CliOptions opts;
  try {
    opts = options_from(request.value("options", Json::object()));
  } catch (const SchemaError& e) {
    return cli::error_response(2, "schema", e.what());
  }
  return dispatch(request.at("command").get<std::string>(), request.value("payload", Json::object()), opts);
}

/// With `update`, expected files are rewritten from the current output.
inline SuiteReport run_suite(const std::filesystem::path& dir, bool update = false) {
  const std::string suffix = ".request.json";
  std::vector<std::filesystem::path> requests;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) requests.push_back(entry.path());
  }
  std::sort(requests.begin(), requests.end());
  SuiteReport report;
  for (const auto& req : requests) {
    std::string file = req.filename().string();
    SuiteCase c{file.substr(0, file.size() - suffix.size()), false, {}};
    auto expected_path = req.parent_path() / (c.name + ".expected.json");
    CliResponse r = run_request(read_json_file(req));
    Json actual{{"exit_code", r.exit_code}, {"response", r.body}};
    if (update) {
      std::ofstream(expected_path) << actual.dump(2) << "\n";
    }
    Json expected = read_json_file(expected_path);
    c.passed = actual == expected;
    if (!c.passed) c.diff = Json::diff(expected, actual).dump(2);
    report.cases.push_back(std::move(c));
  }
  return report;
}

inline std::string to_string(const SuiteReport& r) {
  std::ostringstream out;
  for (const auto& c : r.cases) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << "\n";
    if (!c.passed) out << c.diff << "\n";
  }
  out << r.passed() << "/" << r.cases.size() << " cases passed\n";
  return out.str();
}

}  // namespace patchwork

#endif  // PATCHWORK_CLI_HPP
