#ifndef PATCHWORK_ANNULUS_SERIES_HPP
#define PATCHWORK_ANNULUS_SERIES_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patchwork/exponent.hpp"
#include "patchwork/padic.hpp"
#include "patchwork/polynomial.hpp"

namespace patchwork {

/// Where a series lives: Q_p-coefficients, circle |t| = p^(-rho_log), degrees
/// in [-window, window]. With a cap, terms of valuation >= cap are dropped and
/// the remaining coefficients are rounded to that p-adic precision.
struct SeriesContext {
  long prime = 3;
  Exponent rho_log = Rational(1, 2);
  int window = 64;
  std::optional<Rational> cap;

  bool compatible(const SeriesContext& o) const {
    return prime == o.prime && rho_log == o.rho_log && window == o.window && cap == o.cap;
  }
};

class AnnulusSeries {
public:
  using Terms = std::map<int, Rational>;

  explicit AnnulusSeries(SeriesContext ctx = {}) : ctx_(std::move(ctx)) { require_odd_prime(ctx_.prime); }
  AnnulusSeries(SeriesContext ctx, Terms terms) : ctx_(std::move(ctx)), terms_(std::move(terms)) {
    require_odd_prime(ctx_.prime);
    normalize();
  }

  static AnnulusSeries monomial(const SeriesContext& ctx, const Rational& c, int deg) {
    return AnnulusSeries(ctx, Terms{{deg, c}});
  }
  static AnnulusSeries constant(const SeriesContext& ctx, const Rational& c) { return monomial(ctx, c, 0); }

  const SeriesContext& context() const { return ctx_; }
  const Terms& terms() const { return terms_; }
  Rational coeff(int d) const {
    auto it = terms_.find(d);
    return it == terms_.end() ? Rational(0) : it->second;
  }
  bool is_zero() const { return terms_.empty(); }
  int min_degree() const { return terms_.empty() ? 0 : terms_.begin()->first; }
  int max_degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

  /// A non-zero term fell outside the degree window at some point.
  bool window_saturated() const { return saturated_; }
  /// A term was dropped by the precision cap at some point.
  bool precision_truncated() const { return truncated_; }
  void clear_flags() { saturated_ = truncated_ = false; }

  Exponent term_valuation(int d, const Rational& c) const {
    return Exponent(Rational(patchwork::valuation(c, ctx_.prime))) + Rational(d) * ctx_.rho_log;
  }

  struct NormReport {
    Exponent valuation;  // the norm is p^(-valuation)
    int degree = 0;      // smallest degree attaining it
    bool at_window_edge = false;
  };

  NormReport norm_report() const {
    if (is_zero()) throw PreconditionError("norm of the zero series");
    std::optional<NormReport> best;
    for (const auto& [d, c] : terms_) {
      Exponent e = term_valuation(d, c);
      if (!best || e < best->valuation) best = NormReport{e, d, false};
    }
    for (const auto& [d, c] : terms_)
      if ((d == ctx_.window || d == -ctx_.window) && term_valuation(d, c) == best->valuation) best->at_window_edge = true;
    return *best;
  }

  /// -log_p of the sup-norm on the circle.
  Exponent valuation() const { return norm_report().valuation; }

  AnnulusSeries plus_part() const { return filtered([](int d) { return d >= 0; }); }
  AnnulusSeries minus_part() const { return filtered([](int d) { return d < 0; }); }

  AnnulusSeries operator-() const {
    AnnulusSeries r = *this;
    for (auto& [d, c] : r.terms_) c = -c;
    return r;
  }
  AnnulusSeries& operator+=(const AnnulusSeries& o) {
    check(o);
    for (const auto& [d, c] : o.terms_) terms_[d] += c;
    saturated_ |= o.saturated_;
    truncated_ |= o.truncated_;
    normalize();
    return *this;
  }
  AnnulusSeries& operator-=(const AnnulusSeries& o) {
    check(o);
    for (const auto& [d, c] : o.terms_) terms_[d] -= c;
    saturated_ |= o.saturated_;
    truncated_ |= o.truncated_;
    normalize();
    return *this;
  }
  friend AnnulusSeries operator+(AnnulusSeries a, const AnnulusSeries& b) { return a += b; }
  friend AnnulusSeries operator-(AnnulusSeries a, const AnnulusSeries& b) { return a -= b; }

  friend AnnulusSeries operator*(const Rational& k, AnnulusSeries s) {
    for (auto& [d, c] : s.terms_) c *= k;
    s.normalize();
    return s;
  }

  friend AnnulusSeries operator*(const AnnulusSeries& a, const AnnulusSeries& b) {
    a.check(b);
    AnnulusSeries r(a.ctx_);
    r.saturated_ = a.saturated_ || b.saturated_;
    r.truncated_ = a.truncated_ || b.truncated_;
    if (a.is_zero() || b.is_zero()) return r;
    // integer convolution over a common denominator per factor
    auto numerators = [](const AnnulusSeries& s, Integer& den) {
      den = 1;
      for (const auto& [d, c] : s.terms_) den = lcm(den, Integer(c.get_den()));
      std::vector<std::pair<int, Integer>> out;
      out.reserve(s.terms_.size());
      for (const auto& [d, c] : s.terms_) out.emplace_back(d, Integer(c.get_num()) * (den / Integer(c.get_den())));
      return out;
    };
    Integer da, db;
    auto na = numerators(a, da);
    auto nb = numerators(b, db);
    int lo = na.front().first + nb.front().first;
    int hi = na.back().first + nb.back().first;
    std::vector<Integer> acc(static_cast<std::size_t>(hi - lo + 1));
    for (const auto& [i, x] : na)
      for (const auto& [j, y] : nb) mpz_addmul(acc[static_cast<std::size_t>(i + j - lo)].get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
    Integer den = da * db;
    for (std::size_t k = 0; k < acc.size(); ++k)
      if (acc[k] != 0) r.terms_.emplace(static_cast<int>(k) + lo, make_rational(acc[k], den));
    r.normalize();
    return r;
  }

  friend bool operator==(const AnnulusSeries& a, const AnnulusSeries& b) { return a.terms_ == b.terms_; }

  /// Same terms re-read in another context with the same prime and radius.
  AnnulusSeries with_context(const SeriesContext& ctx) const {
    if (ctx.prime != ctx_.prime || !(ctx.rho_log == ctx_.rho_log))
      throw PreconditionError("with_context cannot change prime or radius");
    AnnulusSeries r(ctx, terms_);
    r.saturated_ |= saturated_;
    r.truncated_ |= truncated_;
    return r;
  }

  /// Inverse of a series with |s - 1| < 1, by Newton iteration y <- y (2 - s y).
  /// Needs a precision cap, since the inverse is an infinite series.
  AnnulusSeries inverse_near_one() const {
    if (!ctx_.cap) throw PreconditionError("series inversion needs a precision cap");
    AnnulusSeries one = constant(ctx_, 1);
    AnnulusSeries h = *this - one;
    if (!h.is_zero() && h.valuation() <= Exponent(0)) throw PreconditionError("inverse_near_one needs |s - 1| < 1");
    AnnulusSeries y = one;
    for (int iter = 0; iter < 64; ++iter) {
      AnnulusSeries err = *this * y - one;
      if (err.is_zero()) return y;
      y = y - y * err;
    }
    throw PreconditionError("series inversion did not converge");
  }

private:
  template <class Pred>
  AnnulusSeries filtered(Pred keep) const {
    AnnulusSeries r(ctx_);
    for (const auto& [d, c] : terms_)
      if (keep(d)) r.terms_.emplace(d, c);
    r.saturated_ = saturated_;
    r.truncated_ = truncated_;
    return r;
  }

  void check(const AnnulusSeries& o) const {
    if (!ctx_.compatible(o.ctx_)) throw PreconditionError("series from different contexts");
  }

  void normalize() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->second == 0) {
        it = terms_.erase(it);
        continue;
      }
      if (it->first > ctx_.window || it->first < -ctx_.window) {
        saturated_ = true;
        it = terms_.erase(it);
        continue;
      }
      if (ctx_.cap) {
        long v = patchwork::valuation(it->second, ctx_.prime);
        Exponent tau = Exponent(Rational(v)) + Rational(it->first) * ctx_.rho_log;
        Exponent room = Exponent(*ctx_.cap) - tau;
        if (room <= Exponent(0)) {
          truncated_ = true;
          it = terms_.erase(it);
          continue;
        }
        unsigned long k = static_cast<unsigned long>(to_long(ceil_of(room)));
        Integer m = ipow(ctx_.prime, k);
        Rational u = it->second / pow(Rational(ctx_.prime), v);
        Integer r = reduce_mod_prime_power(u, ctx_.prime, k);
        if (2 * r > m) r -= m;
        it->second = Rational(r) * pow(Rational(ctx_.prime), v);
      }
      ++it;
    }
  }

  SeriesContext ctx_;
  Terms terms_;
  bool saturated_ = false;
  bool truncated_ = false;
};

inline std::string to_string(const AnnulusSeries& s, const std::string& var = "t") {
  if (s.is_zero()) return "0";
  std::string out;
  for (const auto& [d, c] : s.terms()) {
    bool neg = c < 0;
    Rational a = neg ? Rational(-c) : c;
    out += out.empty() ? (neg ? "-" : "") : (neg ? " - " : " + ");
    std::string mono = d == 0 ? "" : (d == 1 ? var : var + "^" + std::to_string(d));
    if (mono.empty())
      out += to_string(a);
    else if (a == 1)
      out += mono;
    else
      out += to_string(a) + "*" + mono;
  }
  return out;
}

/// Parses a Laurent polynomial such as "t^-1 + 5 + t" (t or T).
inline AnnulusSeries parse_series(const SeriesContext& ctx, std::string_view text) {
  RationalFunction f = parse_rational_function(text, "tT");
  const Polynomial& den = f.den();
  long k = den.degree();
  if (den != Polynomial::monomial(1, static_cast<std::size_t>(k)))
    throw PreconditionError("series text must be a Laurent polynomial");
  AnnulusSeries::Terms terms;
  const auto& c = f.num().coeffs();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0) terms.emplace(static_cast<int>(i) - static_cast<int>(k), c[i]);
  return AnnulusSeries(ctx, std::move(terms));
}

}  // namespace patchwork

#endif  // PATCHWORK_ANNULUS_SERIES_HPP
