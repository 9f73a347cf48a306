#ifndef PATCHWORK_BERKOVICH_HPP
#define PATCHWORK_BERKOVICH_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/exponent.hpp"
#include "patchwork/rational.hpp"

namespace patchwork {

/// eta_{c,r} with r = p^(-log_radius); no radius means the rigid point c.
/// The center may be infinity; eta_{inf,r} is the point of {|1/T| <= r}.
struct BerkPoint {
  bool infinity = false;
  Rational center = 0;
  std::optional<Exponent> log_radius;

  static BerkPoint rigid(Rational c) { return {false, std::move(c), std::nullopt}; }
  static BerkPoint at_infinity() { return {true, 0, std::nullopt}; }
  static BerkPoint disc_point(Rational c, Exponent l) { return {false, std::move(c), std::move(l)}; }
};

inline BerkPoint normalized(const BerkPoint& x) {
  if (x.infinity && x.log_radius) return BerkPoint::disc_point(0, -*x.log_radius);
  return x;
}

/// Type 1, 2 or 3 with |k^x| = p^Z.
inline int classify_point(const BerkPoint& x) {
  if (!x.log_radius) return 1;
  return x.log_radius->is_rational() ? 2 : 3;
}

namespace detail {

/// |a - b| <= p^(-l), i.e. v(a - b) >= l.
inline bool within(const Rational& a, const Rational& b, const Exponent& l, long p) {
  if (a == b) return true;
  return Exponent(Rational(valuation(Rational(a - b), p))) >= l;
}

/// |a - b| < p^(-l).
inline bool strictly_within(const Rational& a, const Rational& b, const Exponent& l, long p) {
  if (a == b) return true;
  return Exponent(Rational(valuation(Rational(a - b), p))) > l;
}

}  // namespace detail

inline bool same_point(const BerkPoint& a0, const BerkPoint& b0, long p) {
  BerkPoint a = normalized(a0), b = normalized(b0);
  if (a.log_radius.has_value() != b.log_radius.has_value()) return false;
  if (!a.log_radius) return a.infinity == b.infinity && (a.infinity || a.center == b.center);
  return *a.log_radius == *b.log_radius && detail::within(a.center, b.center, *a.log_radius, p);
}

inline std::string to_string(const BerkPoint& x) {
  std::string c = x.infinity ? "inf" : to_string(x.center);
  if (!x.log_radius) return c;
  return "eta(" + c + ", " + to_string(*x.log_radius) + ")";
}

/// D(c, r) closed; used as an open disc D^-(c, r) when it is a hole.
struct Disc {
  Rational center = 0;
  Exponent log_radius;

  BerkPoint shilov() const { return BerkPoint::disc_point(center, log_radius); }
};

inline bool same_disc(const Disc& a, const Disc& b, long p) {
  return a.log_radius == b.log_radius && detail::within(a.center, b.center, a.log_radius, p);
}

inline bool closed_contains(const Disc& d, const BerkPoint& x0, long p) {
  BerkPoint x = normalized(x0);
  if (x.infinity) return false;
  if (x.log_radius && *x.log_radius < d.log_radius) return false;
  return detail::within(d.center, x.center, d.log_radius, p);
}

inline bool open_contains(const Disc& d, const BerkPoint& x0, long p) {
  BerkPoint x = normalized(x0);
  if (x.infinity) return false;
  if (x.log_radius && *x.log_radius <= d.log_radius) return false;
  return detail::strictly_within(d.center, x.center, d.log_radius, p);
}

/// Closed disc (or the whole line) minus finitely many open discs.
struct SwissCheese {
  std::optional<Disc> outer;
  std::vector<Disc> holes;

  static SwissCheese whole() { return {}; }
  static SwissCheese disc(Rational c, Exponent l) { return {Disc{std::move(c), std::move(l)}, {}}; }
  /// r_inner <= |T - c| <= r_outer.
  static SwissCheese annulus(const Rational& c, const Exponent& inner_log, const Exponent& outer_log) {
    return {Disc{c, outer_log}, {Disc{c, inner_log}}};
  }
  /// |T - c| >= r.
  static SwissCheese outside(const Rational& c, const Exponent& l) { return {std::nullopt, {Disc{c, l}}}; }
};

struct AffinoidDomain {
  std::vector<SwissCheese> pieces;

  AffinoidDomain() = default;
  AffinoidDomain(SwissCheese c) : pieces{std::move(c)} {}
  explicit AffinoidDomain(std::vector<SwissCheese> ps) : pieces(std::move(ps)) {}
};

inline std::string to_string(const Disc& d) { return "D(" + to_string(d.center) + ", " + to_string(d.log_radius) + ")"; }

inline std::string to_string(const SwissCheese& s) {
  std::string out = s.outer ? to_string(*s.outer) : "P1";
  for (const auto& h : s.holes) out += " \\ " + to_string(h) + "^-";
  return out;
}

inline std::string to_string(const AffinoidDomain& d) {
  std::string out;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) out += (i ? " u " : "") + to_string(d.pieces[i]);
  return out.empty() ? "{}" : out;
}

// ---------------------------------------------------------------- disc relations

namespace detail {

/// Open disc a inside open disc b.
inline bool open_in_open(const Disc& a, const Disc& b, long p) {
  return a.log_radius >= b.log_radius && strictly_within(a.center, b.center, b.log_radius, p);
}

/// Open disc h inside closed disc d.
inline bool open_in_closed(const Disc& h, const Disc& d, long p) {
  return h.log_radius >= d.log_radius && within(h.center, d.center, d.log_radius, p);
}

/// Closed disc d inside open disc h.
inline bool closed_in_open(const Disc& d, const Disc& h, long p) {
  return d.log_radius > h.log_radius && strictly_within(d.center, h.center, h.log_radius, p);
}

/// Closed disc a inside closed disc b.
inline bool closed_in_closed(const Disc& a, const Disc& b, long p) {
  return a.log_radius >= b.log_radius && within(a.center, b.center, b.log_radius, p);
}

inline bool disc_less(const Disc& a, const Disc& b) {
  if (!(a.log_radius == b.log_radius)) return a.log_radius < b.log_radius;
  return a.center < b.center;
}

}  // namespace detail

/// Drops holes outside the outer disc and holes inside other holes; nothing
/// when a hole swallows the outer disc.
inline std::optional<SwissCheese> normalize(SwissCheese s, long p) {
  std::vector<Disc> kept;
  for (const auto& h : s.holes) {
    if (s.outer) {
      if (detail::closed_in_open(*s.outer, h, p)) return std::nullopt;
      if (!detail::open_in_closed(h, *s.outer, p)) continue;  // disjoint from the outer disc
    }
    kept.push_back(h);
  }
  std::sort(kept.begin(), kept.end(), detail::disc_less);
  std::vector<Disc> holes;
  for (const auto& h : kept) {
    bool redundant = false;
    for (const auto& g : holes)
      if (detail::open_in_open(h, g, p)) redundant = true;
    if (!redundant) holes.push_back(h);
  }
  s.holes = std::move(holes);
  return s;
}

inline bool contains(const SwissCheese& s, const BerkPoint& x, long p) {
  if (s.outer && !closed_contains(*s.outer, x, p)) return false;
  for (const auto& h : s.holes)
    if (open_contains(h, x, p)) return false;
  return true;
}

inline bool contains(const AffinoidDomain& d, const BerkPoint& x, long p) {
  for (const auto& s : d.pieces)
    if (contains(s, x, p)) return true;
  return false;
}

inline std::optional<SwissCheese> intersect(const SwissCheese& a, const SwissCheese& b, long p) {
  SwissCheese r;
  if (!a.outer) {
    r.outer = b.outer;
  } else if (!b.outer) {
    r.outer = a.outer;
  } else if (detail::closed_in_closed(*a.outer, *b.outer, p)) {
    r.outer = a.outer;
  } else if (detail::closed_in_closed(*b.outer, *a.outer, p)) {
    r.outer = b.outer;
  } else {
    return std::nullopt;
  }
  r.holes = a.holes;
  r.holes.insert(r.holes.end(), b.holes.begin(), b.holes.end());
  return normalize(std::move(r), p);
}

/// The single point a degenerate cheese reduces to: a closed disc with an open
/// hole of the same radius and a type-3 radius.
inline std::optional<BerkPoint> as_single_point(const SwissCheese& s) {
  if (!s.outer || s.outer->log_radius.is_rational()) return std::nullopt;
  for (const auto& h : s.holes)
    if (h.log_radius == s.outer->log_radius) return s.outer->shilov();
  return std::nullopt;
}

inline bool has_interior(const SwissCheese& s) { return !as_single_point(s).has_value(); }

/// Topological boundary: the Shilov point of the outer disc and one point per hole.
inline std::vector<BerkPoint> boundary(const SwissCheese& s) {
  if (auto pt = as_single_point(s)) return {*pt};
  std::vector<BerkPoint> out;
  if (s.outer) out.push_back(s.outer->shilov());
  for (const auto& h : s.holes) out.push_back(h.shilov());
  return out;
}

inline std::vector<BerkPoint> boundary(const AffinoidDomain& d, long p) {
  std::vector<BerkPoint> out;
  for (const auto& s : d.pieces)
    for (const auto& x : boundary(s)) {
      bool dup = false;
      for (const auto& y : out) dup = dup || same_point(x, y, p);
      if (!dup) out.push_back(x);
    }
  return out;
}

inline bool type3_boundary(const SwissCheese& s) {
  if (s.outer && s.outer->log_radius.is_rational()) return false;
  for (const auto& h : s.holes)
    if (h.log_radius.is_rational()) return false;
  return true;
}

/// Same set, compared through the normalized description.
inline bool same_set(const SwissCheese& a0, const SwissCheese& b0, long p) {
  auto a = normalize(a0, p), b = normalize(b0, p);
  if (!a || !b) return !a && !b;
  if (a->outer.has_value() != b->outer.has_value()) return false;
  if (a->outer && !same_disc(*a->outer, *b->outer, p)) return false;
  if (auto x = as_single_point(*a)) {
    auto y = as_single_point(*b);
    return y && same_point(*x, *y, p);
  }
  if (as_single_point(*b)) return false;
  if (a->holes.size() != b->holes.size()) return false;
  for (const auto& h : a->holes) {
    bool found = false;
    for (const auto& g : b->holes) found = found || same_disc(h, g, p);
    if (!found) return false;
  }
  return true;
}

inline bool subset(const SwissCheese& a, const SwissCheese& b, long p) {
  auto i = intersect(a, b, p);
  if (!i) return !normalize(a, p).has_value();
  return same_set(*i, a, p);
}

/// Union of two cheeses that meet; the result is again a cheese.
inline SwissCheese merge(const SwissCheese& a, const SwissCheese& b, long p) {
  const SwissCheese* big = &a;
  const SwissCheese* small = &b;
  if (a.outer && (!b.outer || !detail::closed_in_closed(*b.outer, *a.outer, p))) std::swap(big, small);
  SwissCheese r;
  r.outer = big->outer;
  // a point of the big outer disc is missed iff it lies in a hole of the big
  // piece and outside the small piece
  for (const auto& h : big->holes) {
    if (small->outer && !detail::open_in_closed(h, *small->outer, p)) {
      r.holes.push_back(h);  // disjoint from the small outer disc
      continue;
    }
    for (const auto& g : small->holes) {
      if (detail::open_in_open(h, g, p)) r.holes.push_back(h);
      else if (detail::open_in_open(g, h, p)) r.holes.push_back(g);
    }
  }
  return *normalize(std::move(r), p);
}

/// Pieces merged until pairwise disjoint; empty pieces dropped.
inline AffinoidDomain normalize(const AffinoidDomain& d, long p) {
  std::vector<SwissCheese> pieces;
  for (const auto& s : d.pieces)
    if (auto n = normalize(s, p)) pieces.push_back(*n);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < pieces.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < pieces.size() && !changed; ++j)
        if (intersect(pieces[i], pieces[j], p)) {
          pieces[i] = merge(pieces[i], pieces[j], p);
          pieces.erase(pieces.begin() + static_cast<long>(j));
          changed = true;
        }
  }
  return AffinoidDomain(std::move(pieces));
}

enum class Membership { inside, on_boundary, outside };

inline std::string to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::on_boundary: return "on_boundary";
    default: return "outside";
  }
}

inline Membership membership(const BerkPoint& x, const AffinoidDomain& d, long p) {
  bool in = false;
  for (const auto& s : d.pieces) {
    if (!contains(s, x, p)) continue;
    in = true;
    for (const auto& b : boundary(s))
      if (same_point(b, x, p)) return Membership::on_boundary;
  }
  return in ? Membership::inside : Membership::outside;
}

/// Rejects descriptions outside the supported shape: holes must sit inside the
/// outer disc without filling it, and must be pairwise disjoint.
inline void validate(const SwissCheese& s, long p) {
  require_odd_prime(p);
  for (std::size_t i = 0; i < s.holes.size(); ++i) {
    const auto& h = s.holes[i];
    if (s.outer && !detail::open_in_closed(h, *s.outer, p))
      throw PreconditionError("hole " + to_string(h) + " is not inside the outer disc");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& g = s.holes[j];
      if (detail::open_in_open(h, g, p) || detail::open_in_open(g, h, p))
        throw PreconditionError("holes " + to_string(g) + " and " + to_string(h) + " overlap");
    }
  }
}

// ---------------------------------------------------------------- interiors and complements

/// Pieces of P1 \ Int(s) for a cheese with type-3 radii: the outside of the
/// outer disc and the closed discs of the holes.
inline std::vector<SwissCheese> complement_of_interior(const SwissCheese& s) {
  if (!type3_boundary(s)) throw PreconditionError("interior complement needs type-3 boundary radii");
  std::vector<SwissCheese> out;
  if (s.outer) out.push_back(SwissCheese::outside(s.outer->center, s.outer->log_radius));
  for (const auto& h : s.holes) out.push_back(SwissCheese::disc(h.center, h.log_radius));
  return out;
}

/// Connected components of c \ Int(d).
inline std::vector<SwissCheese> subtract_interior(const SwissCheese& c, const SwissCheese& d, long p) {
  if (!has_interior(d)) return {c};
  std::vector<SwissCheese> out;
  for (const auto& piece : complement_of_interior(d))
    if (auto i = intersect(c, piece, p)) out.push_back(*i);
  return out;
}

/// {C_1, ..., C_n, D}: the components of C \ Int D that are not single points,
/// followed by D.
inline std::vector<SwissCheese> refine_pair(const SwissCheese& c, const SwissCheese& d, long p) {
  if (!type3_boundary(c) || !type3_boundary(d)) throw PreconditionError("refine_pair needs type-3 boundaries");
  if (subset(c, d, p)) return {d};
  std::vector<SwissCheese> out;
  for (const auto& piece : subtract_interior(c, d, p))
    if (has_interior(piece)) out.push_back(piece);
  out.push_back(d);
  return out;
}

// ---------------------------------------------------------------- set equality by sampling

namespace detail {

inline void collect_discs(const SwissCheese& s, std::vector<Disc>& out) {
  if (s.outer) out.push_back(*s.outer);
  out.insert(out.end(), s.holes.begin(), s.holes.end());
}

}  // namespace detail

/// Test points for comparing unions of cheeses: every center at every critical
/// radius and the midpoints between them, plus one branch leaving each center
/// at every integral radius in range, and infinity.
inline std::vector<BerkPoint> sample_grid(const std::vector<SwissCheese>& sets, long p) {
  std::vector<Disc> discs;
  for (const auto& s : sets) detail::collect_discs(s, discs);
  std::set<Rational> centers{Rational(0)};
  std::vector<Exponent> radii;
  for (const auto& d : discs) {
    centers.insert(d.center);
    radii.push_back(d.log_radius);
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::vector<Exponent> grid;
  if (radii.empty()) {
    grid = {Exponent(-1), Exponent(0), Exponent(1)};
  } else {
    grid.push_back(radii.front() - Exponent(1));
    for (std::size_t i = 0; i < radii.size(); ++i) {
      grid.push_back(radii[i]);
      if (i + 1 < radii.size()) grid.push_back(Rational(1, 2) * (radii[i] + radii[i + 1]));
    }
    grid.push_back(radii.back() + Exponent(1));
  }
  long lo = to_long(floor_of(grid.front())) - 1, hi = to_long(ceil_of(grid.back())) + 1;

  std::vector<BerkPoint> pts{BerkPoint::at_infinity()};
  for (const auto& c : centers) {
    pts.push_back(BerkPoint::rigid(c));
    for (const auto& l : grid) pts.push_back(BerkPoint::disc_point(c, l));
    for (long k = lo; k <= hi; ++k) {
      Rational off = c + pow(Rational(p), k);
      pts.push_back(BerkPoint::rigid(off));
      for (const auto& l : grid)
        if (l > Exponent(k)) pts.push_back(BerkPoint::disc_point(off, l));
      pts.push_back(BerkPoint::disc_point(off, Exponent(Rational(2 * k + 1, 2))));
    }
  }
  return pts;
}

inline bool union_contains(const std::vector<SwissCheese>& sets, const BerkPoint& x, long p) {
  for (const auto& s : sets)
    if (contains(s, x, p)) return true;
  return false;
}

/// Set equality of two finite unions, decided on the sample grid of both.
inline bool same_union(const std::vector<SwissCheese>& a, const std::vector<SwissCheese>& b, long p) {
  std::vector<SwissCheese> all = a;
  all.insert(all.end(), b.begin(), b.end());
  for (const auto& x : sample_grid(all, p))
    if (union_contains(a, x, p) != union_contains(b, x, p)) return false;
  return true;
}

// ---------------------------------------------------------------- nice covers

struct NiceCover {
  std::vector<AffinoidDomain> elements;
  std::vector<BerkPoint> intersection_points;
  std::optional<std::vector<int>> parity;
};

struct NiceReport {
  bool nice = true;
  int clause = 0;  // 0 covering, 1-3 the definition's clauses, 4 parity
  std::string message;
  std::vector<std::size_t> witnesses;
};

namespace detail {

inline const SwissCheese& only_piece(const AffinoidDomain& d, std::size_t index) {
  if (d.pieces.size() != 1)
    throw PreconditionError("cover element " + std::to_string(index) + " is not a single connected piece");
  return d.pieces.front();
}

inline std::vector<SwissCheese> all_pieces(const std::vector<AffinoidDomain>& ds) {
  std::vector<SwissCheese> out;
  for (const auto& d : ds) out.insert(out.end(), d.pieces.begin(), d.pieces.end());
  return out;
}

}  // namespace detail

/// Pairwise intersection of two cover elements, when it is a single point.
/// Returns nothing for disjoint elements and throws for larger overlaps.
inline std::optional<BerkPoint> meeting_point(const SwissCheese& a, const SwissCheese& b, long p) {
  auto i = intersect(a, b, p);
  if (!i) return std::nullopt;
  auto pt = as_single_point(*i);
  if (!pt) throw PreconditionError("elements overlap in more than a point: " + to_string(*i));
  return pt;
}

inline NiceReport is_nice_cover(const std::vector<AffinoidDomain>& cover, const AffinoidDomain& target, long p) {
  auto fail = [](int clause, std::string msg, std::vector<std::size_t> w) { return NiceReport{false, clause, std::move(msg), std::move(w)}; };
  std::vector<SwissCheese> elems;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto norm = normalize(cover[i], p);
    if (norm.pieces.size() != 1) return fail(1, "element is empty or not connected", {i});
    const auto& s = norm.pieces.front();
    if (!type3_boundary(s)) return fail(1, "element has a boundary point that is not of type 3", {i});
    elems.push_back(s);
  }
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = 0; j < elems.size(); ++j)
      if (i != j && subset(elems[i], elems[j], p)) return fail(3, "one element contains another", {i, j});
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = i + 1; j < elems.size(); ++j) {
      auto inter = intersect(elems[i], elems[j], p);
      if (!inter) continue;
      auto pt = as_single_point(*inter);
      if (!pt) return fail(2, "elements meet in more than a point", {i, j});
      bool on_i = false, on_j = false;
      for (const auto& b : boundary(elems[i])) on_i = on_i || same_point(b, *pt, p);
      for (const auto& b : boundary(elems[j])) on_j = on_j || same_point(b, *pt, p);
      if (!on_i || !on_j || classify_point(*pt) != 3) return fail(2, "intersection is not a common type-3 boundary point", {i, j});
    }
  if (!same_union(elems, normalize(target, p).pieces, p)) return fail(0, "union of the elements differs from the target", {});
  return {};
}

inline std::vector<BerkPoint> intersection_points(const std::vector<AffinoidDomain>& cover, long p) {
  std::vector<BerkPoint> out;
  for (std::size_t i = 0; i < cover.size(); ++i)
    for (std::size_t j = i + 1; j < cover.size(); ++j)
      for (const auto& a : cover[i].pieces)
        for (const auto& b : cover[j].pieces)
          if (auto pt = meeting_point(a, b, p)) {
            bool dup = false;
            for (const auto& y : out) dup = dup || same_point(*pt, y, p);
            if (!dup) out.push_back(*pt);
          }
  return out;
}

namespace detail {

inline bool inside_some(const SwissCheese& s, const std::vector<SwissCheese>& of, long p) {
  for (const auto& o : of)
    if (subset(s, o, p)) return true;
  return false;
}

inline std::vector<SwissCheese> refine_pieces(std::vector<std::vector<SwissCheese>> domains, long p) {
  // drop empty domains
  std::vector<std::vector<SwissCheese>> live;
  for (auto& d : domains)
    if (!d.empty()) live.push_back(std::move(d));
  if (live.empty()) return {};

  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < live.size() && !pick; ++i)
    for (const auto& s : live[i])
      if (has_interior(s)) {
        pick = i;
        break;
      }
  if (!pick) {
    // only points are left
    std::vector<SwissCheese> pts;
    for (const auto& d : live)
      for (const auto& s : d) {
        bool dup = false;
        for (const auto& t : pts) dup = dup || same_set(s, t, p);
        if (!dup) pts.push_back(s);
      }
    return pts;
  }

  const std::vector<SwissCheese> u = live[*pick];
  std::vector<std::vector<SwissCheese>> rest;
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (i == *pick) continue;
    bool absorbed = true;
    for (const auto& s : live[i]) absorbed = absorbed && inside_some(s, u, p);
    if (absorbed) continue;
    std::vector<SwissCheese> pieces = live[i];
    for (const auto& k : u) {
      std::vector<SwissCheese> next;
      for (const auto& s : pieces)
        for (auto& t : subtract_interior(s, k, p)) next.push_back(std::move(t));
      pieces = std::move(next);
    }
    rest.push_back(std::move(pieces));
  }
  std::vector<SwissCheese> out = u;
  for (auto& w : refine_pieces(std::move(rest), p))
    if (!inside_some(w, u, p)) out.push_back(std::move(w));
  return out;
}

}  // namespace detail

/// Refines a list of domains with type-3 boundaries into a nice cover of their
/// union: keep one domain with interior, cut its interior out of the others,
/// recurse, and drop what the kept domain absorbs.
inline NiceCover nice_refinement(const std::vector<AffinoidDomain>& domains, long p) {
  std::vector<std::vector<SwissCheese>> input;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    for (const auto& s : domains[i].pieces) validate(s, p);
    auto norm = normalize(domains[i], p);
    for (const auto& s : norm.pieces)
      if (!type3_boundary(s))
        throw PreconditionError("domain " + std::to_string(i) + " has a boundary point that is not of type 3");
    input.push_back(norm.pieces);
  }
  std::vector<SwissCheese> pieces = detail::refine_pieces(std::move(input), p);
  // a leftover point inside another element is not needed
  std::vector<SwissCheese> kept;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    bool absorbed = false;
    if (!has_interior(pieces[i]))
      for (std::size_t j = 0; j < pieces.size(); ++j)
        if (j != i && has_interior(pieces[j]) && subset(pieces[i], pieces[j], p)) absorbed = true;
    if (!absorbed) kept.push_back(pieces[i]);
  }
  NiceCover cover;
  for (auto& s : kept) cover.elements.emplace_back(std::move(s));
  cover.intersection_points = intersection_points(cover.elements, p);
  return cover;
}

/// Splits A at each point of S (type 3, interior): the element holding eta_{c,r}
/// is cut into {|T - c| <= r} and {|T - c| >= r}.
inline NiceCover cover_with_intersections(const AffinoidDomain& a, const std::vector<BerkPoint>& s, long p) {
  auto norm = normalize(a, p);
  if (norm.pieces.size() != 1) throw PreconditionError("cover_with_intersections needs a connected domain");
  std::vector<SwissCheese> elems{norm.pieces.front()};
  std::vector<BerkPoint> seen;
  for (const auto& raw : s) {
    BerkPoint x = normalized(raw);
    if (classify_point(x) != 3) throw PreconditionError("point " + to_string(raw) + " is not of type 3");
    if (membership(x, norm, p) != Membership::inside)
      throw PreconditionError("point " + to_string(raw) + " is not interior to the domain");
    bool dup = false;
    for (const auto& y : seen) dup = dup || same_point(x, y, p);
    if (dup) continue;
    seen.push_back(x);
    std::optional<std::size_t> holder;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (membership(x, AffinoidDomain(elems[i]), p) == Membership::inside) holder = i;
    if (!holder) throw PreconditionError("internal: split point is not interior to any element");
    SwissCheese u = elems[*holder];
    auto inner = intersect(u, SwissCheese::disc(x.center, *x.log_radius), p);
    auto outer = intersect(u, SwissCheese::outside(x.center, *x.log_radius), p);
    elems[*holder] = *inner;
    elems.insert(elems.begin() + static_cast<long>(*holder) + 1, *outer);
  }
  NiceCover cover;
  for (auto& e : elems) cover.elements.emplace_back(std::move(e));
  cover.intersection_points = intersection_points(cover.elements, p);
  return cover;
}

// ---------------------------------------------------------------- parity

/// One step of building the cover back up after peeling: element `index` joins
/// the union through `parent` (none for the first element of a component).
struct PeelStep {
  std::size_t index;
  std::optional<std::size_t> parent;
  std::optional<BerkPoint> via;  // the meeting point with the parent
};

/// Elements in an order where each one meets exactly one earlier element, so
/// that dropping them from the back keeps every partial union connected.
/// `root_last` starts each component from its highest index instead.
inline std::vector<PeelStep> peeling_order(const std::vector<AffinoidDomain>& cover, long p, bool root_last = false) {
  std::size_t n = cover.size();
  std::vector<std::vector<std::pair<std::size_t, BerkPoint>>> adj(n);
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (auto pt = meeting_point(detail::only_piece(cover[i], i), detail::only_piece(cover[j], j), p)) {
        adj[i].emplace_back(j, *pt);
        adj[j].emplace_back(i, *pt);
        ++edges;
      }
  std::vector<PeelStep> order;
  std::vector<bool> placed(n, false);
  std::size_t components = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t start = root_last ? n - 1 - k : k;
    if (placed[start]) continue;
    ++components;
    placed[start] = true;
    std::size_t head = order.size();
    order.push_back({start, std::nullopt, std::nullopt});
    while (head < order.size()) {
      std::size_t cur = order[head++].index;
      auto nbrs = adj[cur];
      if (root_last) std::reverse(nbrs.begin(), nbrs.end());
      for (const auto& [j, pt] : nbrs)
        if (!placed[j]) {
          placed[j] = true;
          order.push_back({j, cur, pt});
        }
    }
  }
  if (edges + components != n) throw PreconditionError("intersection graph has a cycle; the cover is not nice");
  return order;
}

/// Two-colouring along the peeling order; intersecting elements differ.
inline std::vector<int> parity_function(const NiceCover& cover, long p) {
  std::vector<int> bits(cover.elements.size(), 0);
  for (const auto& step : peeling_order(cover.elements, p))
    bits[step.index] = step.parent ? 1 - bits[*step.parent] : 0;
  for (std::size_t i = 0; i < cover.elements.size(); ++i)
    for (std::size_t j = i + 1; j < cover.elements.size(); ++j)
      if (meeting_point(cover.elements[i].pieces.front(), cover.elements[j].pieces.front(), p) && bits[i] == bits[j])
        throw PreconditionError("parity validation failed; the cover is not nice");
  return bits;
}

}  // namespace patchwork

#endif  // PATCHWORK_BERKOVICH_HPP
