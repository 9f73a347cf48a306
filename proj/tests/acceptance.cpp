// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "patchwork/local_isotropy.hpp"
#include "patchwork/patching.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace patchwork;

namespace {

// Tolerance for the floating-point cross-check of exact norm bounds: cases
// closer than this (relative) are left to the exact comparison alone.
constexpr double kFloatSlack = 1e-9;

struct Outcome {
  bool ok = true;
  std::string detail;
  long checks = 0;

  void expect(bool cond, const std::string& what) {
    ++checks;
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double real_norm(long p, const std::optional<Exponent>& e) {
  if (!e) return 0.0;
  return std::pow(static_cast<double>(p), -(e->rat.get_d() + e->irr.get_d() * std::sqrt(2.0)));
}

// ---------------------------------------------------------------- 1

void u_invariants(Outcome& out) {
  UBound qp = u_bound({1, true, 2});
  out.expect(qp.field_bound == 4, "u_s(Q_p) != 4");
  out.expect(qp.function_field_bound == 8, "u(Q_p(T)) bound != 8");
  out.expect(qp.equality, "n = 1 free should be an equality");
  for (long us = 1; us <= 16; ++us) {
    UBound b = u_bound({1, true, us});
    out.expect(b.field_bound == 2 * us, "u_s(k) != 2 u_s(residue) for u_s = " + std::to_string(us));
    out.expect(b.function_field_bound == 2 * b.field_bound, "function field bound is not twice the field bound");
  }
  for (long n = 0; n <= 6; ++n)
    for (bool free : {true, false}) {
      UBound b = u_bound({n, free, 2});
      out.expect(b.field_bound == pow(Integer(2), static_cast<unsigned long>(free ? n : n + 1)) * 2, "2^n u_s rule");
      out.expect(local_isotropy_threshold({n, free, 2}) == 2 * b.field_bound, "local threshold");
    }
}

// ---------------------------------------------------------------- 2

void padic_oracle(Outcome& out) {
  std::mt19937_64 rng(2);
  long iso = 0, aniso = 0;
  for (long p : {3, 5, 7}) {
    for (int trial = 0; trial < 200; ++trial) {
      auto f = testgen::random_rational_form(rng, 2 + static_cast<std::size_t>(trial % 3), 50);
      auto cert = isotropic_padic(f, p);
      bool expected = testgen::brute_force_isotropic(f.coeffs, p);
      out.expect((cert.verdict == Verdict::isotropic) == expected, "oracle disagreement at p = " + std::to_string(p));
      out.expect(cert.verdict != Verdict::inconclusive, "inconclusive p-adic verdict");
      if (expected) out.expect(verify_padic_witness(f, p, cert), "witness does not verify");
      (expected ? iso : aniso)++;
    }
    for (int trial = 0; trial < 50; ++trial) {
      auto f = testgen::random_rational_form(rng, 5, 50);
      auto cert = isotropic_padic(f, p);
      out.expect(cert.verdict == Verdict::isotropic && verify_padic_witness(f, p, cert), "dimension 5 not certified");
    }
  }
  out.expect(iso > 0 && aniso > 0, "sample has only one verdict");
  out.detail = out.ok ? std::to_string(iso) + " isotropic, " + std::to_string(aniso) + " anisotropic" : out.detail;
}

// ---------------------------------------------------------------- 3

void block_bounds(Outcome& out) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> unit(1, 20);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto mode : {DecompositionMode::free, DecompositionMode::general}) {
      bool integral = mode == DecompositionMode::free;
      std::size_t bound = std::size_t{1} << (integral ? n : n + 1);
      for (int trial = 0; trial < 100; ++trial) {
        DiagonalForm<MonomialElement> f;
        std::size_t d = dim(rng);
        for (std::size_t i = 0; i < d; ++i)
          f.coeffs.push_back({make_rational(unit(rng), unit(rng)), testgen::random_value(rng, n, integral)});
        auto dec = unit_block_decomposition(f, n, mode);
        out.expect(dec.blocks.size() <= bound, "too many blocks for n = " + std::to_string(n));
        out.expect(verify_decomposition(f, dec), "certificate identity fails");
        // a = C u s^2 recomputed coordinatewise
        for (std::size_t i = 0; i < d; ++i) {
          const auto& c = dec.certificates[i];
          const auto& C = dec.blocks[c.block].scale;
          out.expect(f[i].unit == C.unit * c.unit.unit * c.root.unit * c.root.unit, "unit part of a = C u s^2");
          out.expect(f[i].value == C.value + c.unit.value + Rational(2) * c.root.value, "value part of a = C u s^2");
          out.expect(c.unit.value.is_zero(), "block unit is not a unit");
        }
      }
    }
}

// ---------------------------------------------------------------- 4 and 5

const long kP = 3;
std::vector<NiceCover> refined_covers;

void refinement(Outcome& out) {
  std::mt19937_64 rng(4);
  refined_covers.clear();
  for (int trial = 0; trial < 50; ++trial) {
    auto family = testgen::random_family(rng, kP, 8);
    NiceCover cover = nice_refinement(family, kP);
    AffinoidDomain target(detail::all_pieces(family));
    auto rep = is_nice_cover(cover.elements, target, kP);
    out.expect(rep.nice, "not nice: " + rep.message);
    const auto& els = cover.elements;
    for (std::size_t i = 0; i < els.size(); ++i) {
      bool inside = false;
      for (const auto& f : family)
        for (const auto& piece : f.pieces) inside = inside || subset(els[i].pieces.front(), piece, kP);
      out.expect(inside, "element outside every input domain");
      for (std::size_t j = i + 1; j < els.size(); ++j) {
        auto meet = intersect(els[i].pieces.front(), els[j].pieces.front(), kP);
        if (!meet) continue;
        auto pt = as_single_point(*meet);
        out.expect(pt && classify_point(*pt) == 3, "intersection is not a single type-3 point");
      }
    }
    for (const auto& s : cover.intersection_points) {
      int holders = 0;
      for (const auto& e : els) holders += contains(e, s, kP) ? 1 : 0;
      out.expect(holders == 2, "a point lies in " + std::to_string(holders) + " elements");
    }
    refined_covers.push_back(cover);
  }
}

bool separates(const NiceCover& c, const std::vector<int>& bits) {
  for (std::size_t i = 0; i < c.elements.size(); ++i)
    for (std::size_t j = i + 1; j < c.elements.size(); ++j)
      if (intersect(c.elements[i].pieces.front(), c.elements[j].pieces.front(), kP) && bits[i] == bits[j]) return false;
  return true;
}

void parity(Outcome& out) {
  for (const auto& c : refined_covers) {
    auto bits = parity_function(c, kP);
    out.expect(bits.size() == c.elements.size() && separates(c, bits), "parity fails on a refined cover");
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    AffinoidDomain a(testgen::random_cheese(rng, kP));
    std::size_t want = size(rng);
    std::vector<BerkPoint> s;
    for (int tries = 0; tries < 80 && s.size() < want; ++tries) {
      auto x = BerkPoint::disc_point(testgen::small_center(rng, kP), testgen::type3_radius(rng));
      if (membership(x, a, kP) == Membership::inside) s.push_back(x);
    }
    NiceCover c = cover_with_intersections(a, s, kP);
    auto bits = parity_function(c, kP);
    out.expect(separates(c, bits), "parity fails on a split cover");
    out.expect(is_nice_cover(c.elements, a, kP).nice, "split cover is not nice");
  }
}

// ---------------------------------------------------------------- 6

// Floating cross-check of a bound |x| <= c, skipped within kFloatSlack.
bool float_agrees(long p, const std::optional<Exponent>& e, double c, bool exact) {
  double x = real_norm(p, e);
  if (std::fabs(x - c) <= kFloatSlack * c) return true;
  return (x <= c) == exact;
}

void recheck_trace(Outcome& out, const IterationTrace& t, long p) {
  const auto& k = t.constants;
  double eps = k.eps_prime.get_d(), d = k.d.get_d();
  for (const auto& st : t.steps) {
    double s = static_cast<double>(st.s);
    out.expect(st.bound_size && st.bound_residual && st.bound_increment, "a per-step bound fails");
    out.expect(float_agrees(p, st.u, eps, st.bound_size) && float_agrees(p, st.v, eps, st.bound_size),
               "size bound disagrees with floating point");
    out.expect(float_agrees(p, st.residual, d * std::pow(eps, (s + 2) / 2), st.bound_residual),
               "residual bound disagrees with floating point");
    if (st.s > 0)
      out.expect(float_agrees(p, st.du, std::pow(eps, (s + 1) / 2), st.bound_increment) &&
                     float_agrees(p, st.dv, std::pow(eps, (s + 1) / 2), st.bound_increment),
                 "increment bound disagrees with floating point");
  }
}

void approximation(Outcome& out) {
  const long N = 64;
  std::mt19937_64 rng(6);
  long steps = 0;
  for (GroupChart chart : {GroupChart::gl1(), GroupChart::sl2()}) {
    auto k = patching_constants(chart, Rational(1, 2));
    Rational a = 1 / (2 * k.M), b = k.d * k.d / (k.M * k.M * k.M * k.M), c = k.delta / 2;
    out.expect(k.eps_prime == std::min({a, b, c}) && k.eps == k.d * k.eps_prime, "constants");
    for (int trial = 0; trial < 20; ++trial) {
      long p = trial % 2 ? 5 : 3;
      Exponent rho = trial % 4 < 2 ? Exponent(Rational(1, 2)) : Exponent(Rational(1, 4), Rational(1, 4));
      SeriesContext ctx{p, rho, 4 * N, std::nullopt};
      PatchingProblem prob{chart, testgen::random_small_vector(rng, ctx, chart.dim(), 2), Rational(1, 2), N};
      auto r = successive_approximation(prob);
      recheck_trace(out, r.trace, p);
      steps += static_cast<long>(r.trace.steps.size());
      auto res = remultiplication_valuation(prob, r);
      out.expect(!res || *res >= Exponent(Rational(N, 2)), "re-multiplication residual below N/2");
      for (const auto& x : r.u) out.expect(x.minus_part().is_zero(), "u has negative degrees");
      for (const auto& x : r.v) out.expect(x.plus_part().is_zero(), "v has non-negative degrees");
    }
  }
  if (out.ok) out.detail = std::to_string(steps) + " iterations checked";
}

// ---------------------------------------------------------------- 7

bool constant_term_is_identity(const Matrix2& g) {
  return g.e[0].coeff(0) == 1 && g.e[1].coeff(0) == 0 && g.e[2].coeff(0) == 0 && g.e[3].coeff(0) == 1;
}

void factorization(Outcome& out) {
  const long N = 64;
  const Exponent half(Rational(N, 2));
  std::mt19937_64 rng(7);
  GroupChart chart = GroupChart::sl2();
  for (int trial = 0; trial < 20; ++trial) {
    long p = trial % 2 ? 5 : 3;
    Exponent rho = trial % 3 ? Exponent(Rational(1, 2)) : Exponent(Rational(1, 4), Rational(1, 4));
    SeriesContext ctx{p, rho, 4 * N, Rational(N / 2 + 8)};
    Matrix2 g = chart.to_matrix(testgen::random_small_vector(rng, ctx, 3, 2));
    auto f = factor_matrix(g, N);
    for (const auto& x : f.g1.e) out.expect(x.minus_part().is_zero(), "g1 has negative degrees");
    for (const auto& x : f.g2.e) out.expect(x.max_degree() <= 0, "g2 has positive degrees");
    out.expect(constant_term_is_identity(f.g2), "g2 constant term is not I");
    out.expect(!f.residual || *f.residual >= half, "g1 g2 != g to N/2");
    // re-multiply with a finer cap than the solver used
    SeriesContext fine = f.g1.context();
    fine.cap = Rational(2 * N);
    auto d = distance_valuation(f.g1.with_context(fine) * f.g2.with_context(fine), g.with_context(fine));
    out.expect(!d || *d >= half, "finer re-multiplication below N/2");
  }

  // three-piece chain: D(1, lb), D(0, la) minus D^-(1, lb), and |T| >= r_a
  Exponent la(Rational(-2), Rational(1, 3)), lb(Rational(3, 2), Rational(1, 2));
  SwissCheese middle = SwissCheese::disc(0, la);
  middle.holes.push_back(Disc{1, lb});
  NiceCover c;
  c.elements = {AffinoidDomain(SwissCheese::disc(1, lb)), AffinoidDomain(middle), AffinoidDomain(SwissCheese::outside(0, la))};
  c.intersection_points = intersection_points(c.elements, kP);
  c.parity = parity_function(c, kP);
  out.expect(c.intersection_points.size() == 2, "chain cover has the wrong intersections");
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Matrix2> ts;
    for (const auto& s : c.intersection_points) {
      SeriesContext ctx{kP, *s.log_radius, 256, Rational(40)};
      ts.push_back(chart.to_matrix(testgen::random_small_vector(rng, ctx, 3, 2)));
    }
    for (bool root_last : {false, true}) {
      auto r = patch_over_cover(c, ts, kP, N, root_last);
      out.expect(r.verified, "patched elements miss a transition");
      for (const auto& chk : r.checks) {
        out.expect((*c.parity)[chk.zero_side] == 0 && (*c.parity)[chk.one_side] == 1, "orientation");
        // g_{U0} g_{U1}^-1 recomputed from the germs
        const BerkPoint& s = chk.point;
        Matrix2 lhs = germ_at(r.elements[chk.zero_side], s, kP, N) * germ_at(r.elements[chk.one_side], s, kP, N).adjugate();
        std::size_t si = 0;
        while (!same_point(c.intersection_points[si], s, kP)) ++si;
        auto dv = distance_valuation(lhs, ts[si].with_context(lhs.context()));
        out.expect(!dv || *dv >= half, "g_s != g_U0 g_U1^-1 to N/2");
      }
    }
  }
}

// ---------------------------------------------------------------- 8

void local_threshold(Outcome& out) {
  const long p = 3;
  std::mt19937_64 rng(8);
  std::vector<BerkPoint> points;
  for (int i = 0; i < 5; ++i) points.push_back(testgen::random_type2_point(rng, p));
  for (int i = 0; i < 5; ++i) points.push_back(testgen::random_type3_point(rng, p));
  long with_witness = 0, total = 0;
  for (const auto& x : points)
    for (int trial = 0; trial < 4; ++trial) {
      auto q = testgen::random_form(rng, p, 9);
      auto cert = local_isotropy_at_point(q, x, p);
      ++total;
      out.expect(cert.verdict == Verdict::isotropic, "dimension 9 not isotropic at " + to_string(x));
      out.expect(cert.witness || cert.guaranteed_without_witness, "isotropic without a certificate");
      if (cert.witness) {
        ++with_witness;
        out.expect(verify_local_witness(q, x, p, cert), "local witness fails its Hensel check");
      }
    }
  if (out.ok) out.detail = std::to_string(with_witness) + "/" + std::to_string(total) + " with explicit witnesses";
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  void (*run)(Outcome&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "u-invariant arithmetic", 1, u_invariants},
      {2, "p-adic isotropy agrees with brute force", 60, padic_oracle},
      {3, "block-decomposition bounds and certificates", 30, block_bounds},
      {4, "nice-cover refinement", 30, refinement},
      {5, "parity functions", 5, parity},
      {6, "successive approximation bounds, N = 64", 60, approximation},
      {7, "factor supports and 3-piece chain patching", 60, factorization},
      {8, "dimension-9 local isotropy over Q_3(T)", 120, local_threshold},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_seconds) {
      out.ok = false;
      out.detail = "over the time limit";
    }
    if (!out.ok) ++failed;
    std::printf("[%s] criterion %d: %s (%ld checks, %.2f s / %.0f s)%s%s\n", out.ok ? "PASS" : "FAIL", c.id, c.name,
                out.checks, secs, c.limit_seconds, out.detail.empty() ? "" : ": ", out.detail.c_str());
  }
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
