#ifndef PATCHWORK_LOCAL_ISOTROPY_HPP
#define PATCHWORK_LOCAL_ISOTROPY_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/berkovich.hpp"
#include "patchwork/finite_field.hpp"
#include "patchwork/polynomial.hpp"
#include "patchwork/quadratic_forms.hpp"

namespace patchwork {

struct LocalOptions {
  long search_degree = 8;      // largest coordinate degree tried over F_p(t)
  long search_budget = 20000;  // candidate vectors tried per block
  long lift_precision = 16;    // for residue forms over Q_p at rigid points
};

struct LocalBlock {
  std::string scale;
  std::vector<std::size_t> members;
  std::vector<std::string> residue_coeffs;
  Verdict verdict = Verdict::inconclusive;
  bool guaranteed_without_witness = false;
};

struct LocalIsotropyCertificate {
  Verdict verdict = Verdict::inconclusive;
  int point_type = 0;
  long value_group_rank = 0;
  std::string residue_field;
  std::vector<LocalBlock> blocks;
  std::optional<std::vector<RationalFunction>> witness;
  // Hensel check for the witness: |q(x)| < |a_j x_j^2| at the point, as log-norms
  std::optional<std::size_t> hensel_index;
  std::optional<Exponent> defect_log_norm;
  std::optional<Exponent> leading_log_norm;
  // rigid points: the witness lives in a residue form over Q_p
  std::optional<IsotropyCertificate> residue_certificate;
  std::optional<std::size_t> residue_block;
  bool guaranteed_without_witness = false;
  std::vector<std::string> residue_witness;
  std::vector<TraceStep> trace;
};

namespace detail {

inline Integer extended_gcd(const Integer& a, const Integer& b, Integer& x, Integer& y) {
  Integer g;
  mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline RationalFunction shifted_variable(const Rational& c) {
  return RationalFunction::variable() - RationalFunction(c);
}

inline FpPoly reduce_poly(const std::vector<Rational>& coeffs, long p) {
  std::vector<long> c;
  for (const auto& x : coeffs) c.push_back(to_long(reduce_mod_prime_power(x, p, 1)));
  return FpPoly(p, c);
}

/// Lift of a residue polynomial in tau to Q(T): sum h_k tau^k.
inline RationalFunction lift_in(const FpPoly& h, const RationalFunction& tau) {
  RationalFunction acc;
  for (long k = h.degree(); k >= 0; --k) {
    long c = h.coeff(static_cast<std::size_t>(k));
    if (2 * c > h.prime()) c -= h.prime();  // symmetric digits
    acc = acc * tau + RationalFunction(Rational(c));
  }
  return acc;
}

/// Type 3: f = p^v X^J u (1 + m) with |m| < 1, X = T - c.
struct DominantTerm {
  long v = 0;
  long j = 0;
  Rational unit = 1;
};

inline DominantTerm dominant_term(const Polynomial& f, long p, const Rational& c, const Exponent& l) {
  Polynomial g = f.taylor_shift(c);
  std::optional<Exponent> best;
  DominantTerm out;
  for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
    const Rational& b = g.coeffs()[j];
    if (b == 0) continue;
    long v = valuation(b, p);
    Exponent e = Exponent(Rational(v)) + Rational(static_cast<long>(j)) * l;
    if (!best || e < *best) {
      best = e;
      out = {v, static_cast<long>(j), unit_part(b, p)};
    }
  }
  return out;
}

/// Type 2 at radius p^(-m/n): pi = p^a X^b with a n + b m = 1 and tau = X^n p^(-m).
/// f = pi^s * E with |E| = 1 and residue tau~^t * P(tau~), P(0) != 0.
struct GaussResidue {
  long s = 0;
  long t = 0;
  FpPoly poly;
};

struct Type2Frame {
  long m = 0, n = 1, a = 0, b = 0;
};

inline Type2Frame type2_frame(const Rational& l) {
  Type2Frame fr;
  fr.m = to_long(Integer(l.get_num()));
  fr.n = to_long(Integer(l.get_den()));
  Integer x, y;
  extended_gcd(Integer(fr.n), Integer(fr.m), x, y);  // x n + y m = 1
  fr.a = to_long(x);
  fr.b = to_long(y);
  return fr;
}

inline GaussResidue gauss_residue(const Polynomial& f, long p, const Rational& c, const Type2Frame& fr) {
  Polynomial g = f.taylor_shift(c);
  // n * (v_j + j m / n) = n v_j + j m, an integer
  std::optional<long> best;
  for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
    if (g.coeffs()[j] == 0) continue;
    long w = fr.n * valuation(g.coeffs()[j], p) + static_cast<long>(j) * fr.m;
    if (!best || w < *best) best = w;
  }
  GaussResidue out;
  out.s = *best;
  std::map<long, long> terms;
  for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
    const Rational& bj = g.coeffs()[j];
    if (bj == 0) continue;
    long v = valuation(bj, p);
    if (fr.n * v + static_cast<long>(j) * fr.m != out.s) continue;
    long shift = static_cast<long>(j) - fr.b * out.s;
    if (shift % fr.n != 0) throw PreconditionError("internal: dominant term off the tau lattice");
    long t = shift / fr.n;
    if (v - fr.a * out.s + t * fr.m != 0) throw PreconditionError("internal: dominant term does not have norm one");
    terms[t] = to_long(reduce_mod_prime_power(unit_part(bj, p), p, 1));
  }
  out.t = terms.begin()->first;
  std::vector<long> coeffs(static_cast<std::size_t>(terms.rbegin()->first - out.t + 1), 0);
  for (const auto& [t, u] : terms) coeffs[static_cast<std::size_t>(t - out.t)] = u;
  out.poly = FpPoly(p, coeffs);
  return out;
}

/// X-adic order and leading coefficient at a rigid point.
inline std::pair<long, Rational> x_adic_leading(const Polynomial& f, const Rational& c) {
  Polynomial g = f.taylor_shift(c);
  for (std::size_t j = 0; j < g.coeffs().size(); ++j)
    if (g.coeffs()[j] != 0) return {static_cast<long>(j), g.coeffs()[j]};
  throw PreconditionError("internal: zero polynomial");
}

inline long floor_half(long x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

inline std::string show(const std::vector<Rational>& xs) { return join_rationals(xs); }

}  // namespace detail

// ---------------------------------------------------------------- forms over F_p(t)

struct FunctionFieldIsotropy {
  Verdict verdict = Verdict::inconclusive;
  std::optional<std::vector<FpPoly>> witness;
  bool guaranteed_without_witness = false;
};

inline FpPoly evaluate_form(const std::vector<FpPoly>& g, const std::vector<FpPoly>& x) {
  FpPoly acc(g.front().prime());
  for (std::size_t i = 0; i < g.size(); ++i) acc = acc + g[i] * x[i] * x[i];
  return acc;
}

/// Isotropy of sum g_i x_i^2 over F_p(t), g_i non-zero polynomials. Dimension
/// 1 and 2 are decided exactly; otherwise a bounded search over coordinates of
/// degree <= search_degree fixes all but the last coordinate and asks whether
/// -sum g_i x_i^2 / g_k is a square. Dimension >= 5 is isotropic regardless.
inline FunctionFieldIsotropy isotropic_function_field(const std::vector<FpPoly>& g, const LocalOptions& opts) {
  FunctionFieldIsotropy out;
  std::size_t d = g.size();
  if (d == 0) return out;
  long p = g.front().prime();
  for (const auto& gi : g)
    if (gi.is_zero()) throw PreconditionError("zero coefficient over F_p(t)");
  if (d == 1) {
    out.verdict = Verdict::anisotropic;
    return out;
  }
  if (d == 2) {
    FpPoly h = (g[0] * g[1]).scaled(-1);
    if (auto s = h.sqrt()) {
      out.verdict = Verdict::isotropic;
      out.witness = std::vector<FpPoly>{g[1], *s};
    } else {
      out.verdict = Verdict::anisotropic;
    }
    return out;
  }
  // at most five coordinates take part; the rest stay zero
  std::size_t k = std::min<std::size_t>(d, 5);
  const FpPoly& last = g[k - 1];
  long budget = opts.search_budget;
  for (long deg = 0; deg <= opts.search_degree && budget > 0; ++deg) {
    std::size_t free_coords = k - 1;
    std::size_t digits = free_coords * static_cast<std::size_t>(deg + 1);
    // enumerate every coefficient vector that uses degree exactly deg somewhere
    std::vector<long> code(digits, 0);
    while (budget > 0) {
      std::size_t pos = 0;
      while (pos < digits && ++code[pos] == p) code[pos++] = 0;
      if (pos == digits) break;
      std::vector<FpPoly> x(d, FpPoly(p));
      bool uses_top = false;
      for (std::size_t i = 0; i < free_coords; ++i) {
        std::vector<long> c(code.begin() + static_cast<long>(i * static_cast<std::size_t>(deg + 1)),
                            code.begin() + static_cast<long>((i + 1) * static_cast<std::size_t>(deg + 1)));
        uses_top = uses_top || c.back() != 0;
        x[i] = FpPoly(p, c);
      }
      if (!uses_top && deg > 0) continue;
      --budget;
      FpPoly rest(p);
      for (std::size_t i = 0; i < free_coords; ++i) rest = rest + g[i] * x[i] * x[i];
      if (rest.is_zero()) {
        out.verdict = Verdict::isotropic;
        out.witness = x;
        return out;
      }
      // rest + g_k y^2 = 0  <=>  -rest g_k = (g_k y)^2
      FpPoly target = (rest * last).scaled(-1);
      auto h = target.sqrt();
      if (!h) continue;
      auto [y, r] = h->divmod(last);
      if (!r.is_zero()) continue;
      x[k - 1] = y;
      out.verdict = Verdict::isotropic;
      out.witness = x;
      return out;
    }
  }
  if (d >= 5) {
    out.verdict = Verdict::isotropic;
    out.guaranteed_without_witness = true;
  }
  return out;
}

// ---------------------------------------------------------------- the point fields

namespace detail {

inline void hensel_check(const DiagonalForm<RationalFunction>& q, long p, const Rational& c, const Exponent& l,
                         LocalIsotropyCertificate& cert) {
  const auto& x = *cert.witness;
  RationalFunction value = evaluate_form(q, x);
  std::optional<Exponent> defect;
  if (!value.is_zero()) defect = point_norm(value, p, c, l);
  for (std::size_t j = 0; j < q.dim(); ++j) {
    if (x[j].is_zero()) continue;
    Exponent lead = point_norm(q[j] * x[j] * x[j], p, c, l);
    if (!defect || *defect > lead) {
      cert.hensel_index = j;
      cert.leading_log_norm = lead;
      cert.defect_log_norm = defect;
      return;
    }
  }
  throw PreconditionError("internal: witness fails the Hensel check");
}

inline void local_type3(const DiagonalForm<RationalFunction>& q, long p, const Rational& c, const Exponent& l,
                        LocalIsotropyCertificate& cert) {
  cert.value_group_rank = 2;
  cert.residue_field = "F_" + std::to_string(p);
  RationalFunction X = shifted_variable(c);
  struct Item {
    std::size_t index;
    long v, j;
    long residue;
  };
  std::map<std::pair<long, long>, std::vector<Item>> blocks;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    auto n = dominant_term(q[i].num(), p, c, l), d = dominant_term(q[i].den(), p, c, l);
    long v = n.v - d.v, j = n.j - d.j;
    long r = to_long(reduce_mod_prime_power(n.unit / d.unit, p, 1));
    blocks[{((v % 2) + 2) % 2, ((j % 2) + 2) % 2}].push_back({i, v, j, r});
  }
  FiniteField F(p);
  for (const auto& [key, items] : blocks) {
    LocalBlock blk;
    blk.scale = std::string(key.first ? "p" : "1") + (key.second ? "*X" : "");
    std::vector<FiniteField::Element> a;
    for (const auto& it : items) {
      blk.members.push_back(it.index);
      blk.residue_coeffs.push_back(std::to_string(it.residue));
      a.push_back(it.residue);
    }
    auto res = isotropic_finite_field(a, F);
    blk.verdict = res.verdict;
    cert.trace.push_back({"residue_form", "block " + blk.scale + " over F_" + std::to_string(p) + ": " +
                                              std::to_string(items.size()) + " coefficient(s), " + to_string(res.verdict)});
    cert.blocks.push_back(blk);
    if (res.verdict != Verdict::isotropic || cert.witness) continue;
    std::vector<RationalFunction> x(q.dim());
    for (std::size_t k = 0; k < items.size(); ++k) {
      long y = (*res.witness)[k];
      cert.residue_witness.push_back(std::to_string(y));
      if (y == 0) continue;
      // x = y / (p^(v div 2) X^(j div 2))
      RationalFunction root = RationalFunction(pow(Rational(p), floor_half(items[k].v))) * X.pow(floor_half(items[k].j));
      x[items[k].index] = RationalFunction(Rational(y)) / root;
    }
    cert.witness = x;
  }
}

inline void local_type2(const DiagonalForm<RationalFunction>& q, long p, const Rational& c, const Rational& l,
                        const LocalOptions& opts, LocalIsotropyCertificate& cert) {
  cert.value_group_rank = 1;
  cert.residue_field = "F_" + std::to_string(p) + "(t)";
  Type2Frame fr = type2_frame(l);
  RationalFunction X = shifted_variable(c);
  RationalFunction pi = RationalFunction(pow(Rational(p), fr.a)) * X.pow(fr.b);
  RationalFunction tau = X.pow(fr.n) * RationalFunction(pow(Rational(p), -fr.m));
  cert.trace.push_back({"uniformizer", "pi = " + to_string(pi) + ", t = " + to_string(tau)});
  struct Item {
    std::size_t index;
    long s;       // pi-adic order
    long half_t;  // tau~ exponent moved into the square
    FpPoly den;   // residue of the denominator
    FpPoly g;     // block coefficient over F_p[t]
  };
  std::map<long, std::vector<Item>> blocks;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    auto n = gauss_residue(q[i].num(), p, c, fr), d = gauss_residue(q[i].den(), p, c, fr);
    long s = n.s - d.s, t = n.t - d.t;
    long tpar = ((t % 2) + 2) % 2;
    FpPoly g = FpPoly::monomial(p, 1, static_cast<std::size_t>(tpar)) * n.poly * d.poly;
    // residue of a_i / pi^s is t^t P/Q = g * (t^(-(t - tpar)/2) / Q)^2
    blocks[((s % 2) + 2) % 2].push_back({i, s, (t - tpar) / 2, d.poly, g});
  }
  for (const auto& [parity, items] : blocks) {
    LocalBlock blk;
    blk.scale = parity ? "pi" : "1";
    std::vector<FpPoly> g;
    for (const auto& it : items) {
      blk.members.push_back(it.index);
      blk.residue_coeffs.push_back(it.g.to_string("t"));
      g.push_back(it.g);
    }
    auto res = isotropic_function_field(g, opts);
    blk.verdict = res.verdict;
    blk.guaranteed_without_witness = res.guaranteed_without_witness;
    cert.trace.push_back({"residue_form", "block " + blk.scale + " over F_" + std::to_string(p) + "(t): " +
                                              std::to_string(items.size()) + " coefficient(s), " + to_string(res.verdict) +
                                              (res.guaranteed_without_witness ? " (no explicit witness)" : "")});
    cert.blocks.push_back(blk);
    if (res.verdict != Verdict::isotropic || cert.witness || !res.witness) continue;
    std::vector<RationalFunction> x(q.dim());
    for (std::size_t k = 0; k < items.size(); ++k) {
      const FpPoly& z = (*res.witness)[k];
      cert.residue_witness.push_back(z.to_string("t"));
      if (z.is_zero()) continue;
      // x = pi^(-(s - parity)/2) * lift(z Q) * tau^(-half_t)
      const auto& it = items[k];
      x[it.index] = pi.pow(-(it.s - parity) / 2) * lift_in(z * it.den, tau) * tau.pow(-it.half_t);
    }
    cert.witness = x;
  }
}

inline void local_type1(const DiagonalForm<RationalFunction>& q0, long p, std::optional<Rational> center,
                        const LocalOptions& opts, LocalIsotropyCertificate& cert) {
  cert.value_group_rank = 1;
  cert.residue_field = "Q_" + std::to_string(p);
  DiagonalForm<RationalFunction> q = q0;
  Rational c = center.value_or(Rational(0));
  if (!center)
    for (auto& f : q.coeffs) f = f.invert_variable();
  RationalFunction X = shifted_variable(c);
  std::map<long, std::vector<std::pair<std::size_t, std::pair<long, Rational>>>> blocks;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    auto n = x_adic_leading(q[i].num(), c), d = x_adic_leading(q[i].den(), c);
    long j = n.first - d.first;
    blocks[((j % 2) + 2) % 2].push_back({i, {j, n.second / d.second}});
  }
  for (const auto& [parity, items] : blocks) {
    LocalBlock blk;
    blk.scale = parity ? "X" : "1";
    DiagonalForm<Rational> residue;
    for (const auto& [i, jl] : items) {
      blk.members.push_back(i);
      blk.residue_coeffs.push_back(to_string(jl.second));
      residue.coeffs.push_back(jl.second);
    }
    auto res = isotropic_padic(residue, p, opts.lift_precision);
    blk.verdict = res.verdict;
    cert.trace.push_back({"residue_form", "block " + blk.scale + " over Q_" + std::to_string(p) + ": " +
                                              detail::show(residue.coeffs) + " " + to_string(res.verdict)});
    cert.blocks.push_back(blk);
    if (res.verdict != Verdict::isotropic || cert.residue_certificate) continue;
    for (const auto& y : *res.witness) cert.residue_witness.push_back(to_string(y));
    cert.residue_block = cert.blocks.size() - 1;
    if (res.witness_exact) {
      std::vector<RationalFunction> x(q.dim());
      for (std::size_t k = 0; k < items.size(); ++k) {
        const Rational& y = (*res.witness)[k];
        if (y == 0) continue;
        RationalFunction xi = RationalFunction(y) / X.pow(floor_half(items[k].second.first));
        x[items[k].first] = center ? xi : xi.invert_variable();
      }
      cert.witness = x;
    }
    cert.residue_certificate = std::move(res);
  }
}

}  // namespace detail

/// Isotropy of q over the completed field at a point of the Berkovich line
/// over Q_p: split q by the value group of the point, decide each residue
/// form, and turn a residue zero into a witness in Q(T) that passes Hensel's
/// test |q(x)| < |a_j x_j^2|. Only dimension-2 forms are ever reported
/// anisotropic; otherwise a missing witness is inconclusive unless the
/// dimension exceeds the bound `2^(n+1) u_s` of the base profile.
inline LocalIsotropyCertificate local_isotropy_at_point(const DiagonalForm<RationalFunction>& q, const BerkPoint& point,
                                                        long p, const FieldProfile& base = {1, true, 2},
                                                        const LocalOptions& opts = {}) {
  require_odd_prime(p);
  LocalIsotropyCertificate cert;
  BerkPoint x = normalized(point);
  cert.point_type = classify_point(x);
  auto ws = witt_split_trivial(q);
  if (ws.forces_isotropy()) {
    std::vector<RationalFunction> w(q.dim());
    w[ws.zero_index.front()] = RationalFunction(1);
    cert.verdict = Verdict::isotropic;
    cert.witness = w;
    cert.trace.push_back({"witt_split", "zero coefficient"});
    return cert;
  }
  if (q.dim() == 0) return cert;

  if (cert.point_type == 3) {
    detail::local_type3(q, p, x.center, *x.log_radius, cert);
  } else if (cert.point_type == 2) {
    detail::local_type2(q, p, x.center, x.log_radius->rat, opts, cert);
  } else {
    detail::local_type1(q, p, x.infinity ? std::nullopt : std::optional<Rational>(x.center), opts, cert);
  }

  bool any_iso = false, all_aniso = true, guaranteed = false;
  for (const auto& b : cert.blocks) {
    any_iso = any_iso || b.verdict == Verdict::isotropic;
    all_aniso = all_aniso && b.verdict == Verdict::anisotropic;
    guaranteed = guaranteed || b.guaranteed_without_witness;
  }
  if (cert.witness && cert.point_type != 1) detail::hensel_check(q, p, x.center, *x.log_radius, cert);
  Integer threshold = local_isotropy_threshold(base);
  if (any_iso) {
    cert.verdict = Verdict::isotropic;
    cert.guaranteed_without_witness = !cert.witness && !cert.residue_certificate && guaranteed;
  } else if (all_aniso && q.dim() == 2) {
    cert.verdict = Verdict::anisotropic;
  } else if (Integer(static_cast<long>(q.dim())) > threshold) {
    cert.verdict = Verdict::isotropic;
    cert.guaranteed_without_witness = true;
    cert.trace.push_back({"dimension_bound", std::to_string(q.dim()) + " > " + to_string(threshold)});
  } else {
    cert.verdict = Verdict::inconclusive;
    if (all_aniso) cert.trace.push_back({"note", "every residue form is anisotropic"});
  }
  return cert;
}

/// Re-runs the Hensel test on a certificate's witness without any search.
inline bool verify_local_witness(const DiagonalForm<RationalFunction>& q, const BerkPoint& point, long p,
                                 const LocalIsotropyCertificate& cert) {
  BerkPoint x = normalized(point);
  if (cert.verdict != Verdict::isotropic || !cert.witness || cert.witness->size() != q.dim()) return false;
  const auto& w = *cert.witness;
  RationalFunction value = evaluate_form(q, w);
  bool nonzero = false;
  for (const auto& f : w) nonzero = nonzero || !f.is_zero();
  if (!nonzero) return false;
  if (value.is_zero()) return true;
  if (!x.log_radius) {
    // rigid point: X-adic Hensel with X = T - c (or 1/T at infinity)
    auto order = [&](const RationalFunction& f) {
      RationalFunction g = x.infinity ? f.invert_variable() : f;
      Rational c = x.infinity ? Rational(0) : x.center;
      return detail::x_adic_leading(g.num(), c).first - detail::x_adic_leading(g.den(), c).first;
    };
    long vf = order(value);
    for (std::size_t j = 0; j < q.dim(); ++j)
      if (!w[j].is_zero() && vf > order(q[j] * w[j] * w[j])) return true;
    return false;
  }
  Exponent defect = point_norm(value, p, x.center, *x.log_radius);
  for (std::size_t j = 0; j < q.dim(); ++j)
    if (!w[j].is_zero() && defect > point_norm(q[j] * w[j] * w[j], p, x.center, *x.log_radius)) return true;
  return false;
}

}  // namespace patchwork

#endif  // PATCHWORK_LOCAL_ISOTROPY_HPP
