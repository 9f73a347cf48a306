#include <gtest/gtest.h>

#include <random>

#include "patchwork/patching.hpp"
#include "support/generators.hpp"

using namespace patchwork;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

SeriesContext capped(long p, Exponent rho, int window = 256, long cap = 40) { return {p, rho, window, Rational(cap)}; }

// Gauss norm straight from the definition: min over terms of v_p(c) + deg * rho.
std::optional<Exponent> oracle_valuation(const AnnulusSeries& s) {
  std::optional<Exponent> best;
  for (const auto& [d, c] : s.terms()) {
    Exponent e = Exponent(Rational(padic_valuation(c, s.context().prime))) + Rational(d) * s.context().rho_log;
    if (!best || e < *best) best = e;
  }
  return best;
}

Matrix2 unipotent_upper(const AnnulusSeries& b) {
  SeriesContext ctx = b.context();
  AnnulusSeries one = AnnulusSeries::constant(ctx, 1), zero(ctx);
  return {{one, b, zero, one}};
}

bool is_identity(const Matrix2& g, const Exponent& from) {
  auto d = distance_valuation(g, Matrix2::identity(g.context()));
  return !d || *d >= from;
}

}  // namespace

TEST(LaurentSplit, Examples) {
  SeriesContext ctx;
  auto sp = laurent_split(parse_series(ctx, "t^-1 + 5 + t"));
  EXPECT_EQ(to_string(sp.plus), "5 + t");
  EXPECT_EQ(to_string(sp.minus), "t^-1");
  auto z = laurent_split(AnnulusSeries(ctx));
  EXPECT_TRUE(z.plus.is_zero());
  EXPECT_TRUE(z.minus.is_zero());
}

TEST(LaurentSplit, ResumsAndKeepsTheNorm) {
  std::mt19937_64 rng(7);
  for (Exponent rho : {Exponent(q(1, 2)), Exponent(q(-1, 3), q(1, 2))}) {
    SeriesContext ctx{5, rho, 64, std::nullopt};
    for (int trial = 0; trial < 200; ++trial) {
      auto c = testgen::random_small_series(rng, ctx, 0, 6);
      if (c.is_zero()) continue;
      auto sp = laurent_split(c);
      EXPECT_EQ(sp.plus + sp.minus, c);
      for (const auto& [d, x] : sp.plus.terms()) EXPECT_GE(d, 0);
      for (const auto& [d, x] : sp.minus.terms()) EXPECT_LT(d, 0);
      std::optional<Exponent> parts;
      for (const auto* part : {&sp.plus, &sp.minus})
        if (!part->is_zero()) parts = parts ? min(*parts, oracle_valuation(*part).value()) : *oracle_valuation(*part);
      EXPECT_EQ(parts, oracle_valuation(c));
    }
  }
}

TEST(Constants, FollowTheMinimum) {
  auto k = patching_constants(GroupChart::gl1(), q(1, 2));
  EXPECT_EQ(k.eps_prime, q(1, 4));
  EXPECT_EQ(k.eps, q(1, 8));
  GroupChart wide = GroupChart::gl1();
  wide.M = 2;
  auto k2 = patching_constants(wide, q(1, 2));
  EXPECT_EQ(k2.eps_prime, q(1, 64));  // d^2 / M^4
  GroupChart narrow = GroupChart::gl1();
  narrow.delta = q(1, 10);
  EXPECT_EQ(patching_constants(narrow, q(1, 2)).eps_prime, q(1, 20));
  EXPECT_THROW(patching_constants(GroupChart::gl1(), 1), PreconditionError);
}

TEST(SuccessiveApproximation, ZeroTarget) {
  SeriesContext ctx;
  PatchingProblem prob{GroupChart::gl1(), {AnnulusSeries(ctx)}};
  auto r = successive_approximation(prob);
  ASSERT_EQ(r.trace.steps.size(), 1u);
  EXPECT_FALSE(r.trace.steps[0].residual.has_value());
  EXPECT_TRUE(r.u[0].is_zero());
  EXPECT_TRUE(r.v[0].is_zero());
}

TEST(SuccessiveApproximation, AdditiveChartIsOneSplit) {
  SeriesContext ctx;
  auto a = parse_series(ctx, "27*t^-2 + 27 + 9*t^3");
  PatchingProblem prob{GroupChart::additive(), {a}};
  auto r = successive_approximation(prob);
  EXPECT_EQ(r.trace.steps.size(), 2u);
  EXPECT_EQ(r.u[0].terms(), a.plus_part().terms());
  EXPECT_EQ(r.v[0].terms(), a.minus_part().terms());
}

TEST(SuccessiveApproximation, RejectsLargeTargets) {
  SeriesContext ctx;
  // |3| = 1/3 > 1/8
  PatchingProblem prob{GroupChart::gl1(), {parse_series(ctx, "3")}};
  EXPECT_THROW(successive_approximation(prob), PreconditionError);
}

TEST(SuccessiveApproximation, MultiplicativeChartConverges) {
  std::mt19937_64 rng(19);
  for (Exponent rho : {Exponent(q(1, 2)), Exponent(0, q(1, 3))}) {
    SeriesContext ctx{3, rho, 64, std::nullopt};
    for (int trial = 0; trial < 10; ++trial) {
      auto a = testgen::random_small_series(rng, ctx, 2);
      PatchingProblem prob{GroupChart::gl1(), {a}};
      auto r = successive_approximation(prob);
      EXPECT_TRUE(r.trace.all_bounds_hold());
      for (const auto& [d, c] : r.u[0].terms()) EXPECT_GE(d, 0);
      for (const auto& [d, c] : r.v[0].terms()) EXPECT_LT(d, 0);
      // multiply back exactly without any cap: (1 + u)(1 + v) - (1 + a)
      SeriesContext exact = r.u[0].context();
      exact.cap.reset();
      AnnulusSeries one = AnnulusSeries::constant(exact, 1);
      AnnulusSeries err = (one + r.u[0].with_context(exact)) * (one + r.v[0].with_context(exact)) - one - a.with_context(exact);
      if (!err.is_zero()) {
        EXPECT_GE(err.valuation(), Exponent(32));
      }
      EXPECT_EQ(remultiplication_valuation(prob, r), err.is_zero() ? std::nullopt : std::optional<Exponent>(err.valuation()));
    }
  }
}

TEST(SuccessiveApproximation, TraceBoundsAgainstFloatingPoint) {
  std::mt19937_64 rng(23);
  SeriesContext ctx{5, q(1, 3), 64, std::nullopt};
  auto a = testgen::random_small_series(rng, ctx, 2);
  PatchingProblem prob{GroupChart::gl1(), {a}};
  auto r = successive_approximation(prob);
  auto real = [](const std::optional<Exponent>& e) {
    return e ? std::pow(5.0, -(e->rat.get_d() + e->irr.get_d() * std::sqrt(2.0))) : 0.0;
  };
  for (const auto& st : r.trace.steps) {
    double s = static_cast<double>(st.s);
    EXPECT_LE(real(st.u), 0.25 + 1e-12);
    EXPECT_LE(real(st.residual), 0.5 * std::pow(0.25, (s + 2) / 2) * (1 + 1e-9));
    if (st.s > 0) {
      EXPECT_LE(real(st.du), std::pow(0.25, (s + 1) / 2) * (1 + 1e-9));
    }
  }
}

TEST(FactorMatrix, IdentityAndOneSidedInputs) {
  SeriesContext ctx = capped(3, q(1, 2));
  auto id = factor_matrix(Matrix2::identity(ctx));
  EXPECT_TRUE(is_identity(id.g1, Exponent(1000)));
  EXPECT_TRUE(is_identity(id.g2, Exponent(1000)));

  Matrix2 g = unipotent_upper(parse_series(ctx, "9*t + 27*t^2").with_context(ctx));
  auto f = factor_matrix(g);
  EXPECT_FALSE(distance_valuation(f.g1, g).has_value());
  EXPECT_TRUE(is_identity(f.g2, Exponent(1000)));

  Matrix2 h = unipotent_upper(parse_series(ctx, "27*t^-1").with_context(ctx));
  auto fh = factor_matrix(h);
  EXPECT_TRUE(is_identity(fh.g1, Exponent(1000)));
  EXPECT_FALSE(distance_valuation(fh.g2, h).has_value());
}

TEST(FactorMatrix, PreconditionsAreEnforced) {
  SeriesContext ctx = capped(3, q(1, 2));
  AnnulusSeries one = AnnulusSeries::constant(ctx, 1), zero(ctx);
  Matrix2 far = unipotent_upper(AnnulusSeries::constant(ctx, 1));
  EXPECT_THROW(factor_matrix(far), PreconditionError);
  Matrix2 bad_det{{one + AnnulusSeries::constant(ctx, 9), zero, zero, one}};
  EXPECT_THROW(factor_matrix(bad_det), PreconditionError);
}

TEST(FactorMatrix, RandomMixedSupport) {
  std::mt19937_64 rng(29);
  GroupChart chart = GroupChart::sl2();
  for (Exponent rho : {Exponent(q(1, 2)), Exponent(q(1, 4), q(1, 4))}) {
    SeriesContext ctx = capped(3, rho);
    for (int trial = 0; trial < 6; ++trial) {
      Matrix2 g = chart.to_matrix(testgen::random_small_vector(rng, ctx, 3, 2));
      auto f = factor_matrix(g);
      EXPECT_TRUE(supported_in_nonnegative_degrees(f.g1));
      EXPECT_TRUE(outer_side_near_identity(f.g2));
      EXPECT_TRUE(f.trace.all_bounds_hold());
      // re-multiply in a context with a finer cap than the solver's
      SeriesContext fine = f.g1.context();
      fine.cap = Rational(80);
      auto d = distance_valuation(f.g1.with_context(fine) * f.g2.with_context(fine), g.with_context(fine));
      if (d) {
        EXPECT_GE(*d, Exponent(32));
      }
    }
  }
}

namespace {

Matrix2 random_transition(std::mt19937_64& rng, const BerkPoint& s, long p) {
  SeriesContext ctx = capped(p, *s.log_radius);
  return GroupChart::sl2().to_matrix(testgen::random_small_vector(rng, ctx, 3, 2));
}

NiceCover with_parity(NiceCover c, long p) {
  c.parity = parity_function(c, p);
  return c;
}

// disc D(1, l_b) inside the middle piece D(0, l_a) minus the open disc around 1, and the outside of D(0, l_a)
NiceCover chain_cover(long p) {
  Exponent la(q(-2), q(1, 3)), lb(q(3, 2), q(1, 2));
  SwissCheese middle = SwissCheese::disc(0, la);
  middle.holes.push_back(Disc{1, lb});
  NiceCover c;
  c.elements = {AffinoidDomain(SwissCheese::disc(1, lb)), AffinoidDomain(middle), AffinoidDomain(SwissCheese::outside(0, la))};
  c.intersection_points = intersection_points(c.elements, p);
  return with_parity(c, p);
}

}  // namespace

TEST(PatchOverCover, IdentityTransitions) {
  long p = 3;
  NiceCover c = chain_cover(p);
  ASSERT_EQ(c.intersection_points.size(), 2u);
  std::vector<Matrix2> t;
  for (const auto& s : c.intersection_points) t.push_back(Matrix2::identity(capped(p, *s.log_radius)));
  auto r = patch_over_cover(c, t, p);
  EXPECT_TRUE(r.verified);
  for (std::size_t i = 0; i < c.elements.size(); ++i)
    for (const auto& s : c.intersection_points)
      if (membership(s, c.elements[i], p) != Membership::outside) {
        EXPECT_TRUE(is_identity(germ_at(r.elements[i], s, p, 64), Exponent(1000)));
      }
}

TEST(PatchOverCover, TwoPiecesIsOneFactorization) {
  long p = 3;
  std::mt19937_64 rng(31);
  Exponent l(q(1, 2), q(1, 2));
  NiceCover c;
  c.elements = {AffinoidDomain(SwissCheese::disc(0, l)), AffinoidDomain(SwissCheese::outside(0, l))};
  c.intersection_points = intersection_points(c.elements, p);
  c = with_parity(c, p);
  ASSERT_EQ(c.intersection_points.size(), 1u);
  Matrix2 g = random_transition(rng, c.intersection_points[0], p);
  auto r = patch_over_cover(c, {g}, p);
  EXPECT_TRUE(r.verified);
  // the root (the disc, parity 0) gets g1 and the outside gets g2^-1 from g = g1 g2
  ASSERT_EQ((*c.parity)[0], 0);
  auto f = factor_matrix(g);
  const BerkPoint& s = c.intersection_points[0];
  Matrix2 g0 = germ_at(r.elements[0], s, p, 64), g1 = germ_at(r.elements[1], s, p, 64);
  EXPECT_FALSE(distance_valuation(g0, f.g1.with_context(g0.context())).has_value());
  EXPECT_FALSE(distance_valuation(g1, f.g2.adjugate().with_context(g1.context())).has_value());
  ASSERT_EQ(r.checks.size(), 1u);
  if (r.checks[0].residual) {
    EXPECT_GE(*r.checks[0].residual, Exponent(32));
  }
}

TEST(PatchOverCover, ThreePieceChainInBothOrders) {
  long p = 3;
  std::mt19937_64 rng(37);
  NiceCover c = chain_cover(p);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Matrix2> t;
    for (const auto& s : c.intersection_points) t.push_back(random_transition(rng, s, p));
    for (bool root_last : {false, true}) {
      auto r = patch_over_cover(c, t, p, 64, root_last);
      EXPECT_TRUE(r.verified) << "root_last = " << root_last;
      ASSERT_EQ(r.checks.size(), 2u);
      for (const auto& chk : r.checks) {
        EXPECT_NE(chk.zero_side, chk.one_side);
        EXPECT_EQ((*c.parity)[chk.zero_side], 0);
        if (chk.residual) {
          EXPECT_GE(*chk.residual, Exponent(32));
        }
      }
    }
  }
}

TEST(PatchOverCover, RejectsMissingParityAndFarTransitions) {
  long p = 3;
  NiceCover c = chain_cover(p);
  std::vector<Matrix2> t;
  for (const auto& s : c.intersection_points) t.push_back(Matrix2::identity(capped(p, *s.log_radius)));
  NiceCover no_parity = c;
  no_parity.parity.reset();
  EXPECT_THROW(patch_over_cover(no_parity, t, p), PreconditionError);
  t[0] = unipotent_upper(AnnulusSeries::constant(capped(p, *c.intersection_points[0].log_radius), 1));
  EXPECT_THROW(patch_over_cover(c, t, p), PreconditionError);
}
