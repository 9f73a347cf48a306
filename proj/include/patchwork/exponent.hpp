#ifndef PATCHWORK_EXPONENT_HPP
#define PATCHWORK_EXPONENT_HPP

#include <mpfr.h>

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/rational.hpp"

namespace patchwork {

/// rat + irr * sqrt(2). Used for log-radii and log-norms: a norm is p^(-e).
struct Exponent {
  Rational rat = 0;
  Rational irr = 0;

  Exponent() = default;
  Exponent(Rational r) : rat(std::move(r)) {}
  Exponent(long r) : rat(r) {}
  Exponent(Rational r, Rational i) : rat(std::move(r)), irr(std::move(i)) {}

  bool is_rational() const { return irr == 0; }

  Exponent operator-() const { return {-rat, -irr}; }
  Exponent& operator+=(const Exponent& o) {
    rat += o.rat;
    irr += o.irr;
    return *this;
  }
  Exponent& operator-=(const Exponent& o) {
    rat -= o.rat;
    irr -= o.irr;
    return *this;
  }
  friend Exponent operator+(Exponent a, const Exponent& b) { return a += b; }
  friend Exponent operator-(Exponent a, const Exponent& b) { return a -= b; }
  friend Exponent operator*(const Rational& k, const Exponent& e) { return {k * e.rat, k * e.irr}; }
  friend Exponent operator*(const Exponent& e, const Rational& k) { return k * e; }

  friend bool operator==(const Exponent& a, const Exponent& b) { return a.rat == b.rat && a.irr == b.irr; }
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b);
};

/// Exact sign of a + b*sqrt(2).
inline int sign_of(const Rational& a, const Rational& b) {
  int sa = sgn(a), sb = sgn(b);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // opposite signs: compare a^2 with 2 b^2
  int c = cmp(a * a, 2 * b * b);
  return c == 0 ? 0 : (c > 0 ? sa : sb);
}

inline int sign_of(const Exponent& e) { return sign_of(e.rat, e.irr); }

inline std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
  int s = sign_of(a.rat - b.rat, a.irr - b.irr);
  return s < 0 ? std::strong_ordering::less : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

inline const Exponent& max(const Exponent& a, const Exponent& b) { return a < b ? b : a; }
inline const Exponent& min(const Exponent& a, const Exponent& b) { return b < a ? b : a; }

/// Largest integer m with m <= e.
inline Integer floor_of(const Exponent& e) {
  if (e.is_rational()) return floor_of(e.rat);
  // sqrt(2) lies in (1.414, 1.415); bracket then adjust exactly
  Rational lo = e.rat + e.irr * (e.irr > 0 ? Rational(1414, 1000) : Rational(1415, 1000));
  Integer m = floor_of(lo) - 1;
  while (Exponent(Rational(m + 1)) <= e) m += 1;
  while (Exponent(Rational(m)) > e) m -= 1;
  return m;
}

inline Integer ceil_of(const Exponent& e) {
  Integer f = floor_of(e);
  return Exponent(Rational(f)) == e ? f : f + 1;
}

inline std::string to_string(const Exponent& e) {
  if (e.is_rational()) return to_string(e.rat);
  return "(" + to_string(e.rat) + ", " + to_string(e.irr) + ")";
}

/// A positive real given as a product of rational powers of positive rationals.
struct PowerProduct {
  std::vector<std::pair<Rational, Rational>> factors;  // (base > 0, exponent)

  PowerProduct() = default;
  PowerProduct(const Rational& base, const Rational& exp = 1) { factors.emplace_back(base, exp); }
  PowerProduct& times(const Rational& base, const Rational& exp = 1) {
    if (base <= 0) throw PreconditionError("power product base must be positive");
    factors.emplace_back(base, exp);
    return *this;
  }
};

namespace detail {

class Mpfr {
public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

private:
  mpfr_t v_;
};

struct Interval {
  Mpfr lo, hi;
  explicit Interval(mpfr_prec_t prec) : lo(prec), hi(prec) {
    mpfr_set_zero(lo.get(), 1);
    mpfr_set_zero(hi.get(), 1);
  }
};

inline void log_of_integer(const Integer& z, Interval& out) {
  mpfr_set_z(out.lo.get(), z.get_mpz_t(), MPFR_RNDD);
  mpfr_log(out.lo.get(), out.lo.get(), MPFR_RNDD);
  mpfr_set_z(out.hi.get(), z.get_mpz_t(), MPFR_RNDU);
  mpfr_log(out.hi.get(), out.hi.get(), MPFR_RNDU);
}

// out += q * x where x is an enclosing interval
inline void add_scaled(Interval& out, const Rational& q, const Interval& x, mpfr_prec_t prec) {
  if (q == 0) return;
  Mpfr a(prec), b(prec);
  Integer num(abs(q.get_num())), den(q.get_den());
  if (q > 0) {
    mpfr_mul_z(a.get(), x.lo.get(), num.get_mpz_t(), MPFR_RNDD);
    mpfr_div_z(a.get(), a.get(), den.get_mpz_t(), MPFR_RNDD);
    mpfr_mul_z(b.get(), x.hi.get(), num.get_mpz_t(), MPFR_RNDU);
    mpfr_div_z(b.get(), b.get(), den.get_mpz_t(), MPFR_RNDU);
  } else {
    mpfr_mul_z(a.get(), x.hi.get(), num.get_mpz_t(), MPFR_RNDU);
    mpfr_div_z(a.get(), a.get(), den.get_mpz_t(), MPFR_RNDU);
    mpfr_neg(a.get(), a.get(), MPFR_RNDD);
    mpfr_mul_z(b.get(), x.lo.get(), num.get_mpz_t(), MPFR_RNDD);
    mpfr_div_z(b.get(), b.get(), den.get_mpz_t(), MPFR_RNDD);
    mpfr_neg(b.get(), b.get(), MPFR_RNDU);
  }
  mpfr_add(out.lo.get(), out.lo.get(), a.get(), MPFR_RNDD);
  mpfr_add(out.hi.get(), out.hi.get(), b.get(), MPFR_RNDU);
}

inline void log_of_rational(const Rational& q, Interval& out, mpfr_prec_t prec) {
  Interval n(prec), d(prec);
  log_of_integer(Integer(q.get_num()), n);
  log_of_integer(Integer(q.get_den()), d);
  mpfr_set_zero(out.lo.get(), 1);
  mpfr_set_zero(out.hi.get(), 1);
  add_scaled(out, 1, n, prec);
  add_scaled(out, -1, d, prec);
}

}  // namespace detail

/// Compares p^(-e) with the real number given by `bound`.
///
/// Ties are decided exactly: for rational e both sides are rational powers and
/// are compared after clearing denominators; for irrational e a tie would make
/// p^sqrt(2) algebraic of bounded degree, which it is not, so only the sign of
/// the log-difference needs resolving and directed-rounding intervals converge.
inline std::strong_ordering compare_norm(long p, const Exponent& e, const PowerProduct& bound) {
  if (e.is_rational()) {
    Integer D = e.rat.get_den();
    for (const auto& f : bound.factors) D = lcm(D, Integer(f.second.get_den()));
    // p^(-rat*D) vs prod base^(exp*D)
    Rational lhs = pow(Rational(p), to_long(Integer(-e.rat * D)));
    Rational rhs = 1;
    for (const auto& [base, exp] : bound.factors) rhs *= pow(base, to_long(Integer(exp * D)));
    return cmp(lhs, rhs) <=> 0;
  }
  for (mpfr_prec_t prec = 64; prec <= (1 << 16); prec *= 2) {
    detail::Interval total(prec), logp(prec), sqrt2(prec), tmp(prec);
    detail::log_of_integer(Integer(p), logp);
    mpfr_sqrt_ui(sqrt2.lo.get(), 2, MPFR_RNDD);
    mpfr_sqrt_ui(sqrt2.hi.get(), 2, MPFR_RNDU);
    // -e*log p = -(rat + irr sqrt2) log p; bound e first, then multiply by log p > 0
    detail::Interval ev(prec);
    mpfr_set_q(ev.lo.get(), e.rat.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(ev.hi.get(), e.rat.get_mpq_t(), MPFR_RNDU);
    detail::add_scaled(ev, e.irr, sqrt2, prec);
    {
      detail::Mpfr c1(prec), c2(prec);
      // ev * logp, logp positive: endpoints by sign of ev ends
      auto lo_prod = [&](mpfr_ptr out, mpfr_srcptr x) {
        mpfr_mul(out, x, mpfr_sgn(x) >= 0 ? logp.lo.get() : logp.hi.get(), MPFR_RNDD);
      };
      auto hi_prod = [&](mpfr_ptr out, mpfr_srcptr x) {
        mpfr_mul(out, x, mpfr_sgn(x) >= 0 ? logp.hi.get() : logp.lo.get(), MPFR_RNDU);
      };
      lo_prod(c1.get(), ev.lo.get());
      hi_prod(c2.get(), ev.hi.get());
      // total = -(ev*logp)
      mpfr_neg(total.lo.get(), c2.get(), MPFR_RNDD);
      mpfr_neg(total.hi.get(), c1.get(), MPFR_RNDU);
    }
    for (const auto& [base, exp] : bound.factors) {
      detail::log_of_rational(base, tmp, prec);
      detail::add_scaled(total, -exp, tmp, prec);
    }
    if (mpfr_sgn(total.lo.get()) > 0) return std::strong_ordering::greater;
    if (mpfr_sgn(total.hi.get()) < 0) return std::strong_ordering::less;
  }
  throw PreconditionError("norm comparison did not separate within the precision budget");
}

/// |x| <= bound where |x| = p^(-e).
inline bool norm_at_most(long p, const Exponent& e, const PowerProduct& bound) {
  return compare_norm(p, e, bound) != std::strong_ordering::greater;
}

}  // namespace patchwork

#endif  // PATCHWORK_EXPONENT_HPP
