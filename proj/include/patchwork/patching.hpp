#ifndef PATCHWORK_PATCHING_HPP
#define PATCHWORK_PATCHING_HPP

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/annulus_series.hpp"
#include "patchwork/berkovich.hpp"

namespace patchwork {

using SeriesVector = std::vector<AnnulusSeries>;

// ---------------------------------------------------------------- additive split

struct AnnulusSplit {
  AnnulusSeries plus;   // degrees >= 0: functions on the closed disc
  AnnulusSeries minus;  // degrees < 0: functions on the outer piece, zero at infinity
};

/// Degreewise split at 0. The Gauss norm is the max over terms, so
/// max(|plus|, |minus|) = |c| and any d < 1 works as splitting constant.
inline AnnulusSplit laurent_split(const AnnulusSeries& c) { return {c.plus_part(), c.minus_part()}; }

/// -log_p of the max norm of a vector; nullopt for the zero vector.
inline std::optional<Exponent> vector_valuation(const SeriesVector& x) {
  std::optional<Exponent> out;
  for (const auto& s : x)
    if (!s.is_zero()) out = out ? min(*out, s.valuation()) : s.valuation();
  return out;
}

// ---------------------------------------------------------------- 2x2 matrices

struct Matrix2 {
  std::array<AnnulusSeries, 4> e;  // row-major

  static Matrix2 identity(const SeriesContext& ctx) {
    AnnulusSeries one = AnnulusSeries::constant(ctx, 1), zero(ctx);
    return {{one, zero, zero, one}};
  }
  const SeriesContext& context() const { return e[0].context(); }
  Matrix2 with_context(const SeriesContext& ctx) const {
    return {{e[0].with_context(ctx), e[1].with_context(ctx), e[2].with_context(ctx), e[3].with_context(ctx)}};
  }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {{a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3], a.e[2] * b.e[0] + a.e[3] * b.e[2],
             a.e[2] * b.e[1] + a.e[3] * b.e[3]}};
  }
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return {{a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]}};
  }
  /// The inverse when det = 1.
  Matrix2 adjugate() const { return {{e[3], -e[1], -e[2], e[0]}}; }
  AnnulusSeries det() const { return e[0] * e[3] - e[1] * e[2]; }
  SeriesVector entries() const { return {e.begin(), e.end()}; }
  bool saturated() const {
    for (const auto& x : e)
      if (x.window_saturated()) return true;
    return false;
  }
};

inline std::optional<Exponent> distance_valuation(const Matrix2& a, const Matrix2& b) {
  return vector_valuation((a - b).entries());
}

// ---------------------------------------------------------------- group charts

enum class ChartKind { additive, gl1, sl2 };

inline std::string to_string(ChartKind k) {
  switch (k) {
    case ChartKind::additive: return "additive";
    case ChartKind::gl1: return "gl1";
    default: return "sl2";
  }
}

/// Coordinates near the identity in which the group law f satisfies
/// f(x, 0) = f(0, x) = x. M bounds the coefficients of the expansion of f,
/// delta the radius on which it is defined.
struct GroupChart {
  ChartKind kind = ChartKind::gl1;
  Rational M = 1;
  Rational delta = 1;

  static GroupChart additive() { return {ChartKind::additive, 1, 1}; }
  // g = 1 + x; f = x + y + xy, defined for |x| < 1
  static GroupChart gl1() { return {ChartKind::gl1, 1, 1}; }
  // g = [[1 + x1, x2], [x3, (1 + x2 x3) / (1 + x1)]]; every coefficient of the
  // expansion of f is 0 or +-1, and 1 + x1 is a unit for |x| < 1
  static GroupChart sl2() { return {ChartKind::sl2, 1, 1}; }

  std::size_t dim() const { return kind == ChartKind::sl2 ? 3 : 1; }

  Matrix2 to_matrix(const SeriesVector& x) const {
    if (kind != ChartKind::sl2) throw PreconditionError("only the sl2 chart has a matrix form");
    const SeriesContext& ctx = x[0].context();
    AnnulusSeries one = AnnulusSeries::constant(ctx, 1);
    AnnulusSeries d = (one + x[1] * x[2]) * (one + x[0]).inverse_near_one();
    return {{one + x[0], x[1], x[2], d}};
  }

  SeriesVector from_matrix(const Matrix2& g) const {
    return {g.e[0] - AnnulusSeries::constant(g.context(), 1), g.e[1], g.e[2]};
  }

  SeriesVector multiply(const SeriesVector& x, const SeriesVector& y) const {
    switch (kind) {
      case ChartKind::additive: return {x[0] + y[0]};
      case ChartKind::gl1: return {x[0] + y[0] + x[0] * y[0]};
      default: return from_matrix(to_matrix(x) * to_matrix(y));
    }
  }
};

struct PatchingConstants {
  Rational M = 1, d = Rational(1, 2), delta = 1;
  Rational eps_prime = Rational(1, 4);
  Rational eps = Rational(1, 8);  // d * eps_prime: the admissible size of a target
};

inline PatchingConstants patching_constants(const GroupChart& chart, const Rational& d) {
  if (d <= 0 || d >= 1) throw PreconditionError("the splitting constant d must lie in (0, 1)");
  if (chart.M < 1) throw PreconditionError("the coefficient bound M must be at least 1");
  PatchingConstants k;
  k.M = chart.M;
  k.d = d;
  k.delta = chart.delta;
  Rational a = 1 / (2 * k.M), b = d * d / (k.M * k.M * k.M * k.M), c = k.delta / 2;
  k.eps_prime = std::min({a, b, c});
  k.eps = d * k.eps_prime;
  return k;
}

// ---------------------------------------------------------------- successive approximation

struct PatchingProblem {
  GroupChart chart;
  SeriesVector a;
  Rational d = Rational(1, 2);
  long precision = 64;  // N: stop once the residual has valuation >= N/2
};

struct IterationStep {
  long s = 0;
  std::optional<Exponent> u, v;    // log-norms, nullopt for zero
  std::optional<Exponent> du, dv;  // increments, from s = 1 on
  std::optional<Exponent> residual;
  bool bound_size = true;       // |u_s|, |v_s| <= eps'
  bool bound_increment = true;  // |u_s - u_{s-1}|, |v_s - v_{s-1}| <= eps'^((s+1)/2)
  bool bound_residual = true;   // |f(u_s, v_s) - a| <= d eps'^((s+2)/2)
};

struct IterationTrace {
  PatchingConstants constants;
  std::vector<IterationStep> steps;
  bool all_bounds_hold() const {
    for (const auto& st : steps)
      if (!st.bound_size || !st.bound_increment || !st.bound_residual) return false;
    return true;
  }
};

inline std::string describe(const std::optional<Exponent>& e) { return e ? to_string(*e) : "inf"; }

inline std::string to_string(const IterationStep& st) {
  return "step " + std::to_string(st.s) + ": |u| = p^-" + describe(st.u) + ", |v| = p^-" + describe(st.v) +
         ", residual = p^-" + describe(st.residual);
}

struct ApproximationResult {
  SeriesVector u, v;
  IterationTrace trace;
};

namespace detail {

inline bool norm_at_most(long p, const std::optional<Exponent>& e, const PowerProduct& bound) {
  return !e || patchwork::norm_at_most(p, *e, bound);
}

inline SeriesContext working_context(const SeriesContext& ctx, long precision) {
  SeriesContext w = ctx;
  w.cap = Rational(precision / 2 + 8);
  w.window = std::max<int>(ctx.window, static_cast<int>(4 * precision));
  return w;
}

inline SeriesVector rebase(const SeriesVector& x, const SeriesContext& ctx) {
  SeriesVector out;
  for (const auto& s : x) out.push_back(s.with_context(ctx));
  return out;
}

inline SeriesVector minus(const SeriesVector& a, const SeriesVector& b) {
  SeriesVector out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] - b[i]);
  return out;
}

inline bool any_saturated(const SeriesVector& x) {
  for (const auto& s : x)
    if (s.window_saturated()) return true;
  return false;
}

}  // namespace detail

/// Solves f(u, v) = a with u on the disc side (degrees >= 0) and v on the
/// outer side (degrees < 0), by splitting the residual a - f(u_j, v_j) and
/// adding the parts. Each step checks the three bounds of the construction in
/// exact arithmetic and throws if one fails.
inline ApproximationResult successive_approximation(const PatchingProblem& prob) {
  const GroupChart& chart = prob.chart;
  if (prob.a.size() != chart.dim())
    throw PreconditionError("target has " + std::to_string(prob.a.size()) + " coordinates, chart needs " +
                            std::to_string(chart.dim()));
  if (prob.precision < 4) throw PreconditionError("precision must be at least 4");
  const SeriesContext ctx = detail::working_context(prob.a[0].context(), prob.precision);
  const long p = ctx.prime;
  ApproximationResult out;
  out.trace.constants = patching_constants(chart, prob.d);
  const auto& k = out.trace.constants;
  SeriesVector a = detail::rebase(prob.a, ctx);
  if (!detail::norm_at_most(p, vector_valuation(a), PowerProduct(k.eps)))
    throw PreconditionError("target outside the convergence radius: |a| = p^-" + describe(vector_valuation(a)) +
                            " exceeds eps = " + to_string(k.eps));

  SeriesVector u(chart.dim(), AnnulusSeries(ctx)), v = u, prev_u, prev_v;
  Exponent stop(Rational(prob.precision, 2));
  long max_steps = 4 * prob.precision;
  for (long s = 0;; ++s) {
    SeriesVector residual = detail::minus(a, chart.multiply(u, v));
    if (detail::any_saturated(residual) || detail::any_saturated(u) || detail::any_saturated(v))
      throw PreconditionError("degree window saturated at step " + std::to_string(s) + "; enlarge the window");
    IterationStep st;
    st.s = s;
    st.u = vector_valuation(u);
    st.v = vector_valuation(v);
    st.residual = vector_valuation(residual);
    st.bound_size = detail::norm_at_most(p, st.u, PowerProduct(k.eps_prime)) &&
                    detail::norm_at_most(p, st.v, PowerProduct(k.eps_prime));
    st.bound_residual = detail::norm_at_most(p, st.residual, PowerProduct(k.d).times(k.eps_prime, Rational(s + 2, 2)));
    if (s > 0) {
      st.du = vector_valuation(detail::minus(u, prev_u));
      st.dv = vector_valuation(detail::minus(v, prev_v));
      PowerProduct inc(k.eps_prime, Rational(s + 1, 2));
      st.bound_increment = detail::norm_at_most(p, st.du, inc) && detail::norm_at_most(p, st.dv, inc);
    }
    out.trace.steps.push_back(st);
    if (!st.bound_size || !st.bound_residual || !st.bound_increment)
      throw PreconditionError("approximation bound violated at step " + std::to_string(s) + " (" + to_string(st) + ")");
    if (!st.residual || *st.residual >= stop) break;
    if (s >= max_steps) throw PreconditionError("successive approximation did not reach the target precision");
    prev_u = u;
    prev_v = v;
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto sp = laurent_split(residual[i]);
      u[i] += sp.plus;
      v[i] += sp.minus;
    }
  }
  out.u = u;
  out.v = v;
  return out;
}

/// Valuation of f(u, v) - a recomputed at precision N (exact for the
/// polynomial charts, through the matrices for sl2).
inline std::optional<Exponent> remultiplication_valuation(const PatchingProblem& prob, const ApproximationResult& r) {
  SeriesContext ctx = detail::working_context(prob.a[0].context(), prob.precision);
  if (prob.chart.kind == ChartKind::sl2) {
    ctx.cap = Rational(prob.precision);
    auto u = detail::rebase(r.u, ctx), v = detail::rebase(r.v, ctx), a = detail::rebase(prob.a, ctx);
    return distance_valuation(prob.chart.to_matrix(u) * prob.chart.to_matrix(v), prob.chart.to_matrix(a));
  }
  ctx.cap.reset();
  auto u = detail::rebase(r.u, ctx), v = detail::rebase(r.v, ctx), a = detail::rebase(prob.a, ctx);
  return vector_valuation(detail::minus(prob.chart.multiply(u, v), a));
}

// ---------------------------------------------------------------- SL2 factorization

struct MatrixFactorization {
  Matrix2 g1;  // degrees >= 0
  Matrix2 g2;  // degrees <= 0, constant term I
  IterationTrace trace;
  std::optional<Exponent> residual;  // valuation of g1 g2 - g
};

inline bool supported_in_nonnegative_degrees(const Matrix2& g) {
  for (const auto& x : g.e)
    if (!x.is_zero() && x.min_degree() < 0) return false;
  return true;
}

/// g2 = I + (terms of negative degree).
inline bool outer_side_near_identity(const Matrix2& g) {
  Matrix2 h = g - Matrix2::identity(g.context());
  for (const auto& x : h.e)
    if (!x.is_zero() && x.max_degree() >= 0) return false;
  return true;
}

/// g = g1 g2 with g1 on the disc side and g2 on the outer side, for g in SL2
/// within eps of the identity.
inline MatrixFactorization factor_matrix(const Matrix2& g, long precision = 64, const Rational& d = Rational(1, 2)) {
  GroupChart chart = GroupChart::sl2();
  SeriesContext ctx = detail::working_context(g.context(), precision);
  Matrix2 G = g.with_context(ctx);
  long p = ctx.prime;
  Exponent half(Rational(precision, 2));
  AnnulusSeries det_err = G.det() - AnnulusSeries::constant(ctx, 1);
  if (!det_err.is_zero() && det_err.valuation() < half)
    throw PreconditionError("determinant is not 1: |det - 1| = p^-" + to_string(det_err.valuation()));
  auto k = patching_constants(chart, d);
  auto off = distance_valuation(G, Matrix2::identity(ctx));
  if (!detail::norm_at_most(p, off, PowerProduct(k.eps)))
    throw PreconditionError("matrix outside the convergence radius: |g - I| = p^-" + describe(off) + " exceeds " +
                            to_string(k.eps));
  PatchingProblem prob{chart, chart.from_matrix(G), d, precision};
  auto r = successive_approximation(prob);
  MatrixFactorization out;
  out.g1 = chart.to_matrix(r.u);
  out.g2 = chart.to_matrix(r.v);
  out.trace = std::move(r.trace);
  out.residual = distance_valuation(out.g1 * out.g2, G);
  if (!supported_in_nonnegative_degrees(out.g1) || !outer_side_near_identity(out.g2))
    throw PreconditionError("internal: factor supports are not separated");
  if (out.residual && *out.residual < half)
    throw PreconditionError("re-multiplication residual p^-" + to_string(*out.residual) + " above p^-N/2");
  return out;
}

// ---------------------------------------------------------------- patching over a cover

/// A matrix of functions defined on one side of a type-3 point eta_{c, r}:
/// polynomials in (T - c) on the closed disc side, polynomials in (T - c)^-1
/// on the outer side.
struct SideFactor {
  Rational center;
  Exponent log_radius;
  bool disc_side = true;
  Matrix2 m;
};

/// A group element on a cover element, as an ordered product of side factors.
struct PatchedElement {
  std::vector<SideFactor> factors;
};

namespace detail {

inline SeriesContext point_context(long p, const Exponent& l, long precision) {
  SeriesContext ctx{p, l, static_cast<int>(4 * precision), Rational(precision / 2 + 8)};
  return ctx;
}

/// (T - c)^-1 on the circle of eta_{c', r'} in the coordinate t' = T - c'.
inline AnnulusSeries inverse_coordinate(const Rational& c, const SeriesContext& target, const Rational& c2) {
  Rational delta = c2 - c;
  long p = target.prime;
  const Exponent& l2 = target.rho_log;
  AnnulusSeries out(target);
  if (delta == 0) return AnnulusSeries::monomial(target, 1, -1);
  Exponent vd(Rational(valuation(delta, p)));
  Exponent limit = Exponent(*target.cap) + Exponent(abs(l2.rat) + abs(l2.irr) * 2) + Exponent(abs(vd.rat)) + Exponent(2);
  AnnulusSeries::Terms terms;
  if (vd > l2) {
    // |delta| < r': sum_j (-delta)^j t'^(-j-1)
    Rational c_j = 1;
    for (long j = 0;; ++j) {
      Exponent val = Exponent(Rational(j) * vd.rat) - Rational(j + 1) * l2;
      if (val >= limit) break;
      if (j + 1 > target.window) break;
      terms[static_cast<int>(-j - 1)] = c_j;
      c_j *= -delta;
    }
  } else {
    // |delta| > r': sum_j (-1)^j delta^(-j-1) t'^j
    Rational c_j = 1 / delta;
    for (long j = 0;; ++j) {
      Exponent val = Exponent(Rational(-(j + 1)) * vd.rat) + Rational(j) * l2;
      if (val >= limit) break;
      if (j > target.window) break;
      terms[static_cast<int>(j)] = c_j;
      c_j *= -1 / delta;
    }
  }
  return AnnulusSeries(target, terms);
}

/// Re-expands one entry of a side factor at the point eta_{c2, target radius}.
inline AnnulusSeries reexpand(const AnnulusSeries& f, const SideFactor& side, const SeriesContext& target,
                              const Rational& c2) {
  AnnulusSeries acc(target);
  if (side.disc_side) {
    // sum a_k (T - c)^k with T - c = t' + (c2 - c): Horner from the top
    AnnulusSeries X = AnnulusSeries::monomial(target, 1, 1) + AnnulusSeries::constant(target, c2 - side.center);
    if (f.is_zero()) return acc;
    for (int k = f.max_degree(); k >= 0; --k) acc = acc * X + AnnulusSeries::constant(target, f.coeff(k));
    return acc;
  }
  AnnulusSeries Y = inverse_coordinate(side.center, target, c2);
  if (f.is_zero()) return acc;
  for (int k = -f.min_degree(); k >= 0; --k) acc = acc * Y + AnnulusSeries::constant(target, f.coeff(-k));
  return acc;
}

inline void check_side(const SideFactor& side, const BerkPoint& x, long p) {
  Disc d{side.center, side.log_radius};
  bool ok = side.disc_side ? closed_contains(d, x, p) : !open_contains(d, x, p);
  if (!ok) throw PreconditionError("internal: a side factor is evaluated off its side");
}

}  // namespace detail

/// The germ of an element at a type-3 point, in the coordinate T - c there.
inline Matrix2 germ_at(const PatchedElement& g, const BerkPoint& x, long p, long precision) {
  SeriesContext ctx = detail::point_context(p, *x.log_radius, precision);
  Matrix2 acc = Matrix2::identity(ctx);
  for (const auto& f : g.factors) {
    if (f.center == x.center && f.log_radius == *x.log_radius) {
      acc = acc * f.m.with_context(ctx);
      continue;
    }
    detail::check_side(f, x, p);
    Matrix2 r{std::array<AnnulusSeries, 4>{
        detail::reexpand(f.m.e[0], f, ctx, x.center), detail::reexpand(f.m.e[1], f, ctx, x.center),
        detail::reexpand(f.m.e[2], f, ctx, x.center), detail::reexpand(f.m.e[3], f, ctx, x.center)}};
    acc = acc * r;
  }
  return acc;
}

struct PointCheck {
  BerkPoint point;
  std::size_t zero_side = 0;  // the parity-0 element
  std::size_t one_side = 0;
  std::optional<Exponent> residual;  // valuation of g_{U0} g_{U1}^-1 - g_s
};

struct PatchResult {
  std::vector<PatchedElement> elements;
  std::vector<PeelStep> order;
  std::vector<PointCheck> checks;
  bool verified = false;
};

namespace detail {

/// Disc side of eta for the element, or outer side.
inline bool element_on_disc_side(const AffinoidDomain& u, const BerkPoint& eta, long p) {
  const SwissCheese& s = only_piece(u, 0);
  Disc d{eta.center, *eta.log_radius};
  if (s.outer && same_disc(*s.outer, d, p)) return true;
  for (const auto& h : s.holes)
    if (same_disc(h, d, p)) return false;
  throw PreconditionError("internal: the meeting point is not on the element's boundary");
}

inline std::size_t point_index(const std::vector<BerkPoint>& pts, const BerkPoint& x, long p) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (same_point(pts[i], x, p)) return i;
  throw PreconditionError("no transition given at an intersection point");
}

/// A transition is given in the coordinate T - c at its point.
inline Matrix2 transition_at(const Matrix2& g, const BerkPoint& x, long p, long precision) {
  if (!(g.context().rho_log == *x.log_radius) || g.context().prime != p)
    throw PreconditionError("transition series must live on the circle of their intersection point");
  return g.with_context(point_context(p, *x.log_radius, precision));
}

}  // namespace detail

/// Recomputes g_{U0} g_{U1}^-1 - g_s at every intersection point from the
/// stored factors; no factorization is rerun.
inline std::vector<PointCheck> check_patch(const NiceCover& cover, const std::vector<Matrix2>& transitions,
                                           const std::vector<PatchedElement>& elements, long p, long precision) {
  if (!cover.parity) throw PreconditionError("patching needs a parity function");
  const auto& parity = *cover.parity;
  if (elements.size() != cover.elements.size()) throw PreconditionError("one patched element per cover element is required");
  if (transitions.size() != cover.intersection_points.size())
    throw PreconditionError("one transition per intersection point is required");
  std::vector<PointCheck> checks;
  for (std::size_t si = 0; si < cover.intersection_points.size(); ++si) {
    const BerkPoint& s = cover.intersection_points[si];
    std::optional<std::size_t> zero, one;
    for (std::size_t i = 0; i < cover.elements.size(); ++i)
      if (membership(s, cover.elements[i], p) != Membership::outside) (parity[i] == 0 ? zero : one) = i;
    if (!zero || !one) throw PreconditionError("intersection point is not shared by two elements of opposite parity");
    Matrix2 lhs = germ_at(elements[*zero], s, p, precision) * germ_at(elements[*one], s, p, precision).adjugate();
    if (lhs.saturated()) throw PreconditionError("degree window saturated while re-expanding germs");
    checks.push_back({s, *zero, *one, distance_valuation(lhs, detail::transition_at(transitions[si], s, p, precision))});
  }
  return checks;
}

inline bool all_checks_hold(const std::vector<PointCheck>& checks, long precision) {
  Exponent half(Rational(precision, 2));
  for (const auto& c : checks)
    if (c.residual && *c.residual < half) return false;
  return true;
}

/// Builds g_U for every element so that g_s = g_{U0} g_{U1}^-1 at every
/// intersection point s, U0 being the parity-0 side. Elements are added in a
/// peeling order; at each new point the required germ is factored across the
/// point and the part on the old side multiplies every element already placed.
inline PatchResult patch_over_cover(const NiceCover& cover, const std::vector<Matrix2>& transitions, long p,
                                    long precision = 64, bool root_last = false) {
  require_odd_prime(p);
  if (!cover.parity) throw PreconditionError("patching needs a parity function");
  const auto& parity = *cover.parity;
  if (parity.size() != cover.elements.size()) throw PreconditionError("parity has the wrong length");
  if (transitions.size() != cover.intersection_points.size())
    throw PreconditionError("one transition per intersection point is required");
  for (const auto& s : cover.intersection_points)
    if (classify_point(normalized(s)) != 3) throw PreconditionError("intersection points must be of type 3");

  PatchResult out;
  out.order = peeling_order(cover.elements, p, root_last);
  out.elements.resize(cover.elements.size());
  std::vector<std::size_t> placed;
  for (const auto& step : out.order) {
    if (!step.parent) {
      placed.push_back(step.index);
      continue;
    }
    std::size_t n = step.index, w = *step.parent;
    if (parity[n] == parity[w]) throw PreconditionError("parity does not separate intersecting elements");
    const BerkPoint& eta = *step.via;
    std::size_t si = detail::point_index(cover.intersection_points, eta, p);
    const BerkPoint& s = cover.intersection_points[si];
    Matrix2 g_eta = detail::transition_at(transitions[si], s, p, precision);
    Matrix2 gw = germ_at(out.elements[w], s, p, precision);
    bool new_on_disc = detail::element_on_disc_side(cover.elements[n], s, p);
    // h = L R with L on the side `left_on_disc`
    auto split = [&](const Matrix2& h, bool left_on_disc) {
      if (left_on_disc) {
        auto f = factor_matrix(h, precision);
        return std::pair{f.g1, f.g2};
      }
      auto f = factor_matrix(h.adjugate(), precision);
      return std::pair{f.g2.adjugate(), f.g1.adjugate()};
    };
    Matrix2 id = Matrix2::identity(g_eta.context());
    SideFactor to_rest{s.center, *s.log_radius, !new_on_disc, id}, to_new{s.center, *s.log_radius, new_on_disc, id};
    if (parity[n] == 0) {
      // g_s = g_n g_w^-1: g_n = a, and the rest takes b^-1 where g_s g_w = a b
      auto [a, b] = split(g_eta * gw, new_on_disc);
      to_new.m = a;
      to_rest.m = b.adjugate();
    } else {
      // g_s = g_w g_n^-1: g_w^-1 g_s = c d, the rest takes c and g_n = d^-1
      auto [c, d] = split(gw.adjugate() * g_eta, !new_on_disc);
      to_rest.m = c;
      to_new.m = d.adjugate();
    }
    for (std::size_t i : placed) out.elements[i].factors.push_back(to_rest);
    out.elements[n].factors.push_back(to_new);
    placed.push_back(n);
  }

  // verify every identity, including those the recursion never touched directly
  out.checks = check_patch(cover, transitions, out.elements, p, precision);
  out.verified = all_checks_hold(out.checks, precision);
  return out;
}

}  // namespace patchwork

#endif  // PATCHWORK_PATCHING_HPP
