#ifndef PATCHWORK_QUADRATIC_FORMS_HPP
#define PATCHWORK_QUADRATIC_FORMS_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/finite_field.hpp"
#include "patchwork/padic.hpp"
#include "patchwork/polynomial.hpp"
#include "patchwork/value_vector.hpp"

namespace patchwork {

enum class Verdict { isotropic, anisotropic, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::isotropic: return "isotropic";
    case Verdict::anisotropic: return "anisotropic";
    default: return "inconclusive";
  }
}

struct TraceStep {
  std::string step;
  std::string detail;
};

template <class Elem>
struct DiagonalForm {
  std::vector<Elem> coeffs;

  DiagonalForm() = default;
  DiagonalForm(std::initializer_list<Elem> xs) : coeffs(xs) {}
  explicit DiagonalForm(std::vector<Elem> xs) : coeffs(std::move(xs)) {}
  std::size_t dim() const { return coeffs.size(); }
  const Elem& operator[](std::size_t i) const { return coeffs[i]; }
};

/// c * t^w in a field whose value group is spanned by a basis |pi_1..pi_n| and
/// the coefficient values; t^w denotes the monomial of value w (unit part 1).
struct MonomialElement {
  Rational unit = 1;
  ValueVector value;

  friend MonomialElement operator*(const MonomialElement& a, const MonomialElement& b) {
    return {a.unit * b.unit, a.value + b.value};
  }
  friend bool operator==(const MonomialElement& a, const MonomialElement& b) {
    return a.unit == b.unit && a.value == b.value;
  }
  static MonomialElement pure(ValueVector w) { return {1, std::move(w)}; }
};

inline std::string to_string(const MonomialElement& m) {
  return to_string(m.unit) + "*t^" + to_string(m.value);
}

inline bool is_zero_element(const Rational& x) { return x == 0; }
inline bool is_zero_element(const RationalFunction& f) { return f.is_zero(); }
inline bool is_zero_element(const MonomialElement& m) { return m.unit == 0; }

template <class Elem>
struct WittSplit {
  DiagonalForm<Elem> totally_isotropic;
  DiagonalForm<Elem> regular;
  std::vector<std::size_t> zero_index;
  std::vector<std::size_t> regular_index;

  /// A zero coefficient gives a non-zero vector with q(x) = 0.
  bool forces_isotropy() const { return !zero_index.empty(); }
};

template <class Elem>
WittSplit<Elem> witt_split_trivial(const DiagonalForm<Elem>& q) {
  WittSplit<Elem> s;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    if (is_zero_element(q[i])) {
      s.totally_isotropic.coeffs.push_back(q[i]);
      s.zero_index.push_back(i);
    } else {
      s.regular.coeffs.push_back(q[i]);
      s.regular_index.push_back(i);
    }
  }
  return s;
}

template <class Elem>
struct Block {
  Elem scale;
  std::vector<Elem> units;
  std::vector<std::size_t> members;  // original coefficient index of each unit
};

/// a = blocks[block].scale * unit * root^2.
template <class Elem>
struct CoefficientCertificate {
  std::size_t block = 0;
  Elem unit;
  Elem root;
};

template <class Elem>
struct BlockDecomposition {
  std::vector<Block<Elem>> blocks;
  std::vector<CoefficientCertificate<Elem>> certificates;

  std::size_t dimension() const {
    std::size_t d = 0;
    for (const auto& b : blocks) d += b.units.size();
    return d;
  }
};

template <class Elem>
bool verify_decomposition(const DiagonalForm<Elem>& q, const BlockDecomposition<Elem>& dec) {
  if (dec.certificates.size() != q.dim() || dec.dimension() != q.dim()) return false;
  std::vector<int> seen(q.dim(), 0);
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    const auto& blk = dec.blocks[b];
    if (blk.units.size() != blk.members.size()) return false;
    for (std::size_t j = 0; j < blk.units.size(); ++j) {
      std::size_t i = blk.members[j];
      if (i >= q.dim() || seen[i]++) return false;
      const auto& cert = dec.certificates[i];
      if (cert.block != b || !(cert.unit == blk.units[j])) return false;
      if (!(q[i] == blk.scale * cert.unit * cert.root * cert.root)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- Q_p

/// q = q1 + p q2 with unit blocks: a = p^(v mod 2) * unit * (p^(v div 2))^2.
/// Always returns two blocks, scales 1 and p, possibly empty.
inline BlockDecomposition<Rational> springer_split(const DiagonalForm<Rational>& q, long p) {
  require_odd_prime(p);
  BlockDecomposition<Rational> dec;
  dec.blocks.resize(2);
  dec.blocks[0].scale = 1;
  dec.blocks[1].scale = p;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    if (q[i] == 0) throw PreconditionError("springer_split needs non-zero coefficients");
    long v = valuation(q[i], p);
    long half = v >= 0 ? v / 2 : -((-v + 1) / 2);
    std::size_t b = static_cast<std::size_t>(v - 2 * half);
    Rational unit = unit_part(q[i], p);
    dec.blocks[b].units.push_back(unit);
    dec.blocks[b].members.push_back(i);
    dec.certificates.push_back({b, unit, pow(Rational(p), half)});
  }
  return dec;
}

/// Springer blocks with the empty ones removed (the n = 1 free case over Q_p).
inline BlockDecomposition<Rational> unit_block_decomposition(const DiagonalForm<Rational>& q, long p) {
  BlockDecomposition<Rational> full = springer_split(q, p), dec;
  std::vector<std::size_t> renumber(2, 0);
  for (std::size_t b = 0; b < 2; ++b) {
    if (full.blocks[b].units.empty()) continue;
    renumber[b] = dec.blocks.size();
    dec.blocks.push_back(full.blocks[b]);
  }
  dec.certificates = full.certificates;
  for (auto& c : dec.certificates) c.block = renumber[c.block];
  return dec;
}

// ---------------------------------------------------------------- value-vector model

enum class DecompositionMode { free, general };

namespace detail {

struct MonomialItem {
  std::size_t index;
  Rational unit;
  ValueVector w;  // current representative
  ValueVector h;  // original value = scale + w + 2h
};

struct MonomialLeaf {
  ValueVector scale;
  std::vector<MonomialItem> items;
};

inline void absorb(MonomialItem& it, const Reduction& r) {
  // r.vector = w + 2(k w + c), so h decreases by k w + c
  for (std::size_t i = 0; i < it.w.size(); ++i) it.h[i] -= Rational(r.certificate.k) * it.w[i] + Rational(r.certificate.c[i]);
  it.w = r.vector;
}

inline void split_even_part(std::vector<MonomialItem> items, ValueVector scale, std::vector<bool> usable,
                            std::vector<MonomialLeaf>& leaves) {
  if (items.empty()) return;
  std::size_t n = scale.size();
  std::vector<std::optional<std::size_t>> base(items.size());
  std::vector<Integer> order(items.size());
  bool all_integral = true;
  for (std::size_t k = 0; k < items.size(); ++k) {
    Integer alpha = order_of(items[k].w);
    Reduction r = mpz_odd_p(alpha.get_mpz_t()) ? reduce_odd_order(items[k].w) : reduce_even_order(items[k].w);
    absorb(items[k], r);
    base[k] = r.base_index;
    order[k] = order_of(items[k].w);
    if (order[k] != 1) all_integral = false;
  }

  if (all_integral) {
    std::optional<std::size_t> pivot;
    for (std::size_t i = 0; i < n && !pivot; ++i)
      if (usable[i])
        for (const auto& it : items)
          if (it.w[i] != 0) {
            pivot = i;
            break;
          }
    if (!pivot) {
      for (const auto& it : items)
        if (!it.w.is_zero()) throw PreconditionError("internal: parameter outside the usable set");
      leaves.push_back({scale, std::move(items)});
      return;
    }
    std::size_t i = *pivot;
    std::vector<MonomialItem> even, odd;
    for (auto& it : items) {
      if (it.w[i] == 0) {
        even.push_back(std::move(it));
      } else {
        it.w[i] = 0;  // reduce_odd_order left it at 1
        odd.push_back(std::move(it));
      }
    }
    usable[i] = false;
    split_even_part(std::move(even), scale, usable, leaves);
    split_even_part(std::move(odd), scale + ValueVector::unit(n, i), usable, leaves);
    return;
  }

  // a' = first coefficient of the largest order, b = its base
  std::size_t lead = 0;
  for (std::size_t k = 1; k < items.size(); ++k)
    if (order[k] > order[lead]) lead = k;
  std::size_t b = *base[lead];
  const unsigned long alpha_lead = mpz_scan1(order[lead].get_mpz_t(), 0);
  const ValueVector a_value = items[lead].w;

  std::vector<MonomialItem> tau1, tau2;
  for (std::size_t k = 0; k < items.size(); ++k) {
    MonomialItem it = std::move(items[k]);
    if (k == lead) {
      it.w = ValueVector(n);
      tau2.push_back(std::move(it));
      continue;
    }
    Rational cb = it.w[b];
    Integer den(cb.get_den()), num(cb.get_num());
    unsigned long delta = mpz_scan1(den.get_mpz_t(), 0);
    if (delta < alpha_lead) {
      // multiply by a'^m, m = (2^delta - num) 2^(alpha' - delta), an even power
      Integer m = (pow(Integer(2), delta) - num) * pow(Integer(2), alpha_lead - delta);
      Rational half_m(m / 2);
      it.w += Rational(m) * a_value;
      it.h -= half_m * a_value;
      it.w[b] -= 1;  // now exactly 1; moved into the scale pi_b
      tau1.push_back(std::move(it));
    } else {
      Reduction r = rebase(it.w, b);
      absorb(it, r);
      it.w -= a_value;
      tau2.push_back(std::move(it));
    }
  }
  usable[b] = false;
  split_even_part(std::move(tau1), scale + ValueVector::unit(n, b), usable, leaves);
  split_even_part(std::move(tau2), scale + a_value, usable, leaves);
}

inline void append_leaf(BlockDecomposition<MonomialElement>& dec, const MonomialLeaf& leaf,
                        std::map<std::vector<Rational>, std::size_t>& by_scale) {
  auto key = leaf.scale.coords;
  auto found = by_scale.find(key);
  std::size_t b;
  if (found == by_scale.end()) {
    b = dec.blocks.size();
    by_scale.emplace(key, b);
    dec.blocks.push_back({MonomialElement::pure(leaf.scale), {}, {}});
  } else {
    b = found->second;
  }
  for (const auto& it : leaf.items) {
    MonomialElement u{it.unit, ValueVector(leaf.scale.size())};
    dec.blocks[b].units.push_back(u);
    dec.blocks[b].members.push_back(it.index);
    dec.certificates[it.index] = {b, u, MonomialElement::pure(it.h)};
  }
}

}  // namespace detail

/// Splits q into blocks C * sigma with unit forms sigma. Free mode needs
/// integral values and uses scales prod pi_i^delta_i; general mode handles the
/// odd-order coefficients the same way and eliminates the parameters of the
/// even-order ones one at a time.
inline BlockDecomposition<MonomialElement> unit_block_decomposition(const DiagonalForm<MonomialElement>& q,
                                                                   std::size_t n, DecompositionMode mode) {
  BlockDecomposition<MonomialElement> dec;
  dec.certificates.resize(q.dim());
  std::map<std::vector<Rational>, std::size_t> odd_scales;
  std::vector<detail::MonomialItem> even_items;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const auto& a = q[i];
    if (a.unit == 0) throw PreconditionError("zero coefficient in block decomposition");
    if (a.value.size() != n) throw PreconditionError("coefficient value has the wrong rank");
    Integer alpha = order_of(a.value);
    if (mode == DecompositionMode::free && alpha != 1)
      throw PreconditionError("coefficient norm outside the lattice spanned by the basis: " + to_string(a.value));
    detail::MonomialItem it{i, a.unit, a.value, ValueVector(n)};
    if (mpz_odd_p(alpha.get_mpz_t())) {
      Reduction r = reduce_odd_order(a.value);
      detail::absorb(it, r);
      detail::MonomialLeaf leaf{it.w, {}};
      it.w = ValueVector(n);
      leaf.items.push_back(std::move(it));
      detail::append_leaf(dec, leaf, odd_scales);
    } else {
      even_items.push_back(std::move(it));
    }
  }
  std::vector<detail::MonomialLeaf> leaves;
  detail::split_even_part(std::move(even_items), ValueVector(n), std::vector<bool>(n, true), leaves);
  std::map<std::vector<Rational>, std::size_t> even_scales;
  for (const auto& leaf : leaves) detail::append_leaf(dec, leaf, even_scales);
  return dec;
}

// ---------------------------------------------------------------- isotropy

struct FiniteFieldIsotropy {
  Verdict verdict = Verdict::anisotropic;
  std::optional<std::vector<FiniteField::Element>> witness;
};

inline FiniteField::Element evaluate_form(const FiniteField& F, const std::vector<FiniteField::Element>& a,
                                          const std::vector<FiniteField::Element>& x) {
  FiniteField::Element acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = F.add(acc, F.mul(a[i], F.mul(x[i], x[i])));
  return acc;
}

/// Isotropy over GF(q): zero coefficients and dimension >= 3 are always
/// isotropic (Chevalley-Warning), dimension 2 iff -a1 a2 is a square.
inline FiniteFieldIsotropy isotropic_finite_field(const std::vector<FiniteField::Element>& a, const FiniteField& F) {
  FiniteFieldIsotropy out;
  std::size_t d = a.size();
  for (std::size_t i = 0; i < d; ++i)
    if (a[i] == 0) {
      std::vector<FiniteField::Element> x(d, 0);
      x[i] = 1;
      return {Verdict::isotropic, x};
    }
  if (d <= 1) return out;
  // x_1 = 1 and search x_2 (and x_3 when present) for a zero
  FiniteField::Element minus_a0 = F.neg(a[0]);
  if (auto r = F.sqrt(F.div(minus_a0, a[1]))) {
    std::vector<FiniteField::Element> x(d, 0);
    x[0] = 1;
    x[1] = *r;
    return {Verdict::isotropic, x};
  }
  if (d == 2) return out;
  for (FiniteField::Element x2 = 0; x2 < F.size(); ++x2) {
    // a0 + a1 x2^2 + a2 x3^2 = 0
    FiniteField::Element rest = F.neg(F.add(a[0], F.mul(a[1], F.mul(x2, x2))));
    if (auto r = F.sqrt(F.div(rest, a[2]))) {
      std::vector<FiniteField::Element> x(d, 0);
      x[0] = 1;
      x[1] = x2;
      x[2] = *r;
      return {Verdict::isotropic, x};
    }
  }
  throw PreconditionError("internal: no zero found for a ternary form over a finite field");
}

struct IsotropyCertificate {
  Verdict verdict = Verdict::inconclusive;
  std::optional<std::vector<Rational>> witness;
  bool witness_exact = false;        // q(witness) == 0 in Q
  long lift_precision = 0;           // otherwise v_p(q(witness)) >= 2 * lift_precision
  bool guaranteed_without_witness = false;
  std::vector<std::string> residue_witness;  // printed residue-field vector, when one was found
  std::vector<TraceStep> trace;
};

template <class Elem>
Elem evaluate_form(const DiagonalForm<Elem>& q, const std::vector<Elem>& x) {
  Elem acc = 0;
  for (std::size_t i = 0; i < q.dim(); ++i) acc = acc + q[i] * x[i] * x[i];
  return acc;
}

namespace detail {

inline std::string join_rationals(const std::vector<Rational>& xs) {
  std::string s = "<";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + to_string(xs[i]);
  return s + ">";
}

}  // namespace detail

/// Decides isotropy over Q_p via the Springer split: q is isotropic iff one of
/// the residue forms is; a residue zero is lifted by Hensel's lemma.
inline IsotropyCertificate isotropic_padic(const DiagonalForm<Rational>& q, long p, long lift_precision = 16) {
  require_odd_prime(p);
  if (lift_precision <= 0) throw PreconditionError("lift precision must be positive");
  IsotropyCertificate cert;
  auto ws = witt_split_trivial(q);
  cert.trace.push_back({"witt_split", std::to_string(ws.zero_index.size()) + " zero coefficient(s), regular part " +
                                          detail::join_rationals(ws.regular.coeffs)});
  if (ws.forces_isotropy()) {
    std::vector<Rational> x(q.dim(), Rational(0));
    x[ws.zero_index.front()] = 1;
    cert.verdict = Verdict::isotropic;
    cert.witness = x;
    cert.witness_exact = true;
    return cert;
  }
  BlockDecomposition<Rational> dec = springer_split(q, p);
  cert.trace.push_back({"springer_split", "q1 = " + detail::join_rationals(dec.blocks[0].units) +
                                              ", q2 = " + detail::join_rationals(dec.blocks[1].units)});
  FiniteField F(p);
  for (std::size_t b = 0; b < 2; ++b) {
    const auto& blk = dec.blocks[b];
    std::vector<FiniteField::Element> residue;
    for (const auto& u : blk.units) residue.push_back(to_long(reduce_mod_prime_power(u, p, 1)));
    auto res = isotropic_finite_field(residue, F);
    std::string shown = "<";
    for (std::size_t i = 0; i < residue.size(); ++i) shown += (i ? ", " : "") + std::to_string(residue[i]);
    shown += ">";
    cert.trace.push_back({"residue_form", "block " + std::to_string(b) + " over F_" + std::to_string(p) + ": " + shown +
                                              " " + to_string(res.verdict)});
    if (res.verdict != Verdict::isotropic) continue;

    const auto& y0 = *res.witness;
    std::size_t j = 0;
    while (y0[j] == 0) ++j;
    // fix the other coordinates, solve u_j y_j^2 = -sum_{i != j} u_i y_i^2
    std::vector<Rational> y(y0.size());
    Rational rest = 0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
      if (i == j) continue;
      y[i] = y0[i];
      rest += blk.units[i] * y[i] * y[i];
    }
    Rational target = -rest / blk.units[j];
    Rational root;
    if (rational_sqrt(target, root)) {
      y[j] = root;
      cert.trace.push_back({"hensel_lift", "exact square root of " + to_string(target)});
    } else {
      auto s = hensel_sqrt(target, p, static_cast<unsigned long>(2 * lift_precision));
      if (!s) throw PreconditionError("internal: residue witness does not lift");
      Integer m = ipow(p, static_cast<unsigned long>(2 * lift_precision));
      Integer sj = *s;
      if (mod(sj - y0[j], Integer(p)) != 0) sj = m - sj;
      y[j] = sj;
      cert.trace.push_back({"hensel_lift", "square root of " + to_string(target) + " modulo " + std::to_string(p) + "^" +
                                               std::to_string(2 * lift_precision)});
    }
    std::vector<Rational> x(q.dim(), Rational(0));
    for (std::size_t i = 0; i < blk.members.size(); ++i) x[blk.members[i]] = y[i] / dec.certificates[blk.members[i]].root;
    Rational value = evaluate_form(q, x);
    cert.verdict = Verdict::isotropic;
    cert.witness = x;
    cert.witness_exact = value == 0;
    cert.lift_precision = lift_precision;
    for (auto e : y0) cert.residue_witness.push_back(std::to_string(e));
    if (!cert.witness_exact && valuation(value, p) < 2 * lift_precision)
      throw PreconditionError("internal: lifted witness misses the precision bound");
    return cert;
  }
  cert.verdict = Verdict::anisotropic;
  return cert;
}

/// Re-checks a witness: either q(x) = 0 exactly, or, after scaling q and x to
/// be p-integral with a unit coefficient and a unit coordinate, some partial
/// derivative satisfies Hensel's condition v(q(x)) > 2 v(dq/dx_i).
inline bool verify_padic_witness(const DiagonalForm<Rational>& q, long p, const IsotropyCertificate& cert) {
  if (cert.verdict != Verdict::isotropic || !cert.witness) return false;
  const auto& x = *cert.witness;
  if (x.size() != q.dim()) return false;
  std::optional<long> min_a, min_x;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    if (q[i] != 0) min_a = std::min(min_a.value_or(valuation(q[i], p)), valuation(q[i], p));
    if (x[i] != 0) min_x = std::min(min_x.value_or(valuation(x[i], p)), valuation(x[i], p));
  }
  if (!min_x) return false;
  Rational value = evaluate_form(q, x);
  if (value == 0) return true;
  if (valuation(value, p) < 2 * cert.lift_precision) return false;
  // v(q'(x')) = v(q(x)) - m - 2l and v(d_i') = v(d_i) - m - l
  long m = *min_a, l = *min_x;
  long vf = valuation(value, p) - m - 2 * l;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    if (x[i] == 0 || q[i] == 0) continue;
    long vd = valuation(2 * q[i] * x[i], p) - m - l;
    if (vf > 2 * vd) return true;
  }
  return false;
}

// ---------------------------------------------------------------- u-invariant bounds

struct FieldProfile {
  long n = 1;
  bool free = true;
  long residue_us = 2;
};

struct UBound {
  Integer field_bound;
  Integer function_field_bound;
  bool equality = false;
};

inline UBound u_bound(const FieldProfile& f) {
  if (f.n < 0) throw PreconditionError("rank must be non-negative");
  if (f.residue_us < 1) throw PreconditionError("residue u_s must be at least 1");
  UBound b;
  b.field_bound = pow(Integer(2), static_cast<unsigned long>(f.free ? f.n : f.n + 1)) * f.residue_us;
  b.function_field_bound = 2 * b.field_bound;
  b.equality = f.free && f.n == 1;
  return b;
}

/// Dimension above which every form over a function field of a curve over the
/// base field is isotropic at each point: 2^(n+1) u_s (free), 2^(n+2) u_s (general).
inline Integer local_isotropy_threshold(const FieldProfile& f) {
  return pow(Integer(2), static_cast<unsigned long>(f.free ? f.n + 1 : f.n + 2)) * f.residue_us;
}

}  // namespace patchwork

#endif  // PATCHWORK_QUADRATIC_FORMS_HPP
