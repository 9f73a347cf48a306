#ifndef PATCHWORK_FINITE_FIELD_HPP
#define PATCHWORK_FINITE_FIELD_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchwork/rational.hpp"

namespace patchwork {

/// GF(q) for odd q = p^k, elements encoded as integers in [0, q) whose base-p
/// digits are the coefficients of a polynomial modulo a fixed irreducible.
class FiniteField {
public:
  using Element = long;

  explicit FiniteField(long q) : q_(q) {
    if (q < 3 || q > 100000) throw PreconditionError("field size out of supported range: " + std::to_string(q));
    p_ = smallest_prime_factor(q);
    k_ = 0;
    for (long t = q; t > 1; t /= p_) {
      if (t % p_ != 0) throw PreconditionError(std::to_string(q) + " is not a prime power");
      ++k_;
    }
    if (p_ == 2) throw PreconditionError("even characteristic is not supported");
    modulus_ = find_irreducible();
    build_tables();
  }

  long size() const { return q_; }
  long characteristic() const { return p_; }
  long degree() const { return k_; }

  Element zero() const { return 0; }
  Element one() const { return 1; }
  Element from_integer(long n) const { return ((n % p_) + p_) % p_; }

  Element add(Element a, Element b) const {
    Element r = 0, place = 1;
    for (long i = 0; i < k_; ++i) {
      r += ((a % p_ + b % p_) % p_) * place;
      a /= p_;
      b /= p_;
      place *= p_;
    }
    return r;
  }
  Element neg(Element a) const {
    Element r = 0, place = 1;
    for (long i = 0; i < k_; ++i) {
      r += ((p_ - a % p_) % p_) * place;
      a /= p_;
      place *= p_;
    }
    return r;
  }
  Element sub(Element a, Element b) const { return add(a, neg(b)); }
  Element mul(Element a, Element b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<std::size_t>((log_[static_cast<std::size_t>(a)] + log_[static_cast<std::size_t>(b)]) % (q_ - 1))];
  }
  Element inv(Element a) const {
    if (a == 0) throw PreconditionError("inverse of zero in a finite field");
    return exp_[static_cast<std::size_t>((q_ - 1 - log_[static_cast<std::size_t>(a)]) % (q_ - 1))];
  }
  Element div(Element a, Element b) const { return mul(a, inv(b)); }

  bool is_square(Element a) const { return a == 0 || log_[static_cast<std::size_t>(a)] % 2 == 0; }
  std::optional<Element> sqrt(Element a) const {
    if (a == 0) return 0;
    long l = log_[static_cast<std::size_t>(a)];
    if (l % 2 != 0) return std::nullopt;
    return exp_[static_cast<std::size_t>(l / 2)];
  }

  std::string to_string(Element a) const {
    if (k_ == 1) return std::to_string(a);
    std::string s;
    for (long i = k_ - 1; i >= 0; --i) {
      long place = 1;
      for (long j = 0; j < i; ++j) place *= p_;
      long digit = (a / place) % p_;
      if (digit == 0) continue;
      if (!s.empty()) s += " + ";
      std::string mono = i == 0 ? "" : (i == 1 ? "x" : "x^" + std::to_string(i));
      s += mono.empty() ? std::to_string(digit) : (digit == 1 ? mono : std::to_string(digit) + "*" + mono);
    }
    return s.empty() ? "0" : s;
  }

private:
  static long smallest_prime_factor(long n) {
    for (long d = 2; d * d <= n; ++d)
      if (n % d == 0) return d;
    return n;
  }

  // polynomial product modulo p, then reduction by the monic modulus
  Element slow_mul(Element a, Element b) const {
    std::vector<long> x = digits(a), y = digits(b), z(static_cast<std::size_t>(2 * k_), 0);
    for (long i = 0; i < k_; ++i)
      for (long j = 0; j < k_; ++j) z[static_cast<std::size_t>(i + j)] = (z[static_cast<std::size_t>(i + j)] + x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)]) % p_;
    for (long d = 2 * k_ - 1; d >= k_; --d) {
      long c = z[static_cast<std::size_t>(d)];
      if (c == 0) continue;
      for (long i = 0; i <= k_; ++i) {
        std::size_t idx = static_cast<std::size_t>(d - k_ + i);
        z[idx] = ((z[idx] - c * modulus_[static_cast<std::size_t>(i)]) % p_ + p_) % p_;
      }
    }
    Element r = 0, place = 1;
    for (long i = 0; i < k_; ++i) {
      r += z[static_cast<std::size_t>(i)] * place;
      place *= p_;
    }
    return r;
  }

  std::vector<long> digits(Element a) const {
    std::vector<long> d(static_cast<std::size_t>(k_));
    for (long i = 0; i < k_; ++i) {
      d[static_cast<std::size_t>(i)] = a % p_;
      a /= p_;
    }
    return d;
  }

  // monic polynomial of degree k with no monic factor of degree <= k/2
  std::vector<long> find_irreducible() const {
    if (k_ == 1) return {0, 1};
    long count = 1;
    for (long i = 0; i < k_; ++i) count *= p_;
    for (long code = 0; code < count; ++code) {
      std::vector<long> f(static_cast<std::size_t>(k_ + 1));
      long c = code;
      for (long i = 0; i < k_; ++i) {
        f[static_cast<std::size_t>(i)] = c % p_;
        c /= p_;
      }
      f[static_cast<std::size_t>(k_)] = 1;
      if (f[0] == 0) continue;
      bool irreducible = true;
      for (long d = 1; d <= k_ / 2 && irreducible; ++d) {
        long n = 1;
        for (long i = 0; i < d; ++i) n *= p_;
        for (long g = 0; g < n && irreducible; ++g) {
          std::vector<long> h(static_cast<std::size_t>(d + 1));
          long t = g;
          for (long i = 0; i < d; ++i) {
            h[static_cast<std::size_t>(i)] = t % p_;
            t /= p_;
          }
          h[static_cast<std::size_t>(d)] = 1;
          if (divides(h, f)) irreducible = false;
        }
      }
      if (irreducible) return f;
    }
    throw PreconditionError("no irreducible polynomial found");
  }

  bool divides(const std::vector<long>& h, std::vector<long> f) const {
    std::size_t dh = h.size() - 1;
    for (std::size_t d = f.size() - 1; d >= dh; --d) {
      long c = f[d];
      if (c != 0)
        for (std::size_t i = 0; i <= dh; ++i) f[d - dh + i] = ((f[d - dh + i] - c * h[i]) % p_ + p_) % p_;
      if (d == 0) break;
    }
    for (std::size_t i = 0; i < dh; ++i)
      if (f[i] != 0) return false;
    return true;
  }

  void build_tables() {
    std::vector<long> prime_factors;
    long m = q_ - 1;
    for (long d = 2; d * d <= m; ++d)
      if (m % d == 0) {
        prime_factors.push_back(d);
        while (m % d == 0) m /= d;
      }
    if (m > 1) prime_factors.push_back(m);
    auto power = [&](Element a, long e) {
      Element r = 1;
      while (e > 0) {
        if (e & 1) r = slow_mul(r, a);
        a = slow_mul(a, a);
        e >>= 1;
      }
      return r;
    };
    Element gen = 0;
    for (Element g = 2; g < q_ && gen == 0; ++g) {
      bool primitive = true;
      for (long l : prime_factors)
        if (power(g, (q_ - 1) / l) == 1) primitive = false;
      if (primitive) gen = g;
    }
    exp_.assign(static_cast<std::size_t>(q_ - 1), 0);
    log_.assign(static_cast<std::size_t>(q_), 0);
    Element x = 1;
    for (long i = 0; i < q_ - 1; ++i) {
      exp_[static_cast<std::size_t>(i)] = x;
      log_[static_cast<std::size_t>(x)] = i;
      x = slow_mul(x, gen);
    }
  }

  long q_, p_, k_;
  std::vector<long> modulus_;
  std::vector<Element> exp_;
  std::vector<long> log_;
};

/// Polynomial over F_p with p prime, coefficients in [0, p) from degree 0 upward.
class FpPoly {
public:
  FpPoly() = default;
  explicit FpPoly(long p) : p_(p) {}
  FpPoly(long p, std::vector<long> c) : p_(p), c_(std::move(c)) {
    for (auto& x : c_) x = ((x % p_) + p_) % p_;
    trim();
  }
  static FpPoly constant(long p, long c) { return FpPoly(p, {c}); }
  static FpPoly monomial(long p, long c, std::size_t deg) {
    std::vector<long> v(deg + 1, 0);
    v[deg] = c;
    return FpPoly(p, std::move(v));
  }

  long prime() const { return p_; }
  bool is_zero() const { return c_.empty(); }
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<long>& coeffs() const { return c_; }
  long coeff(std::size_t i) const { return i < c_.size() ? c_[i] : 0; }
  long leading() const { return c_.empty() ? 0 : c_.back(); }

  friend FpPoly operator+(const FpPoly& a, const FpPoly& b) {
    std::vector<long> r(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) + b.coeff(i);
    return FpPoly(a.p_, std::move(r));
  }
  friend FpPoly operator-(const FpPoly& a, const FpPoly& b) {
    std::vector<long> r(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) - b.coeff(i);
    return FpPoly(a.p_, std::move(r));
  }
  friend FpPoly operator*(const FpPoly& a, const FpPoly& b) {
    if (a.is_zero() || b.is_zero()) return FpPoly(a.p_);
    std::vector<long> r(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] = (r[i + j] + a.c_[i] * b.c_[j]) % a.p_;
    return FpPoly(a.p_, std::move(r));
  }
  friend bool operator==(const FpPoly& a, const FpPoly& b) { return a.c_ == b.c_; }

  FpPoly scaled(long k) const {
    std::vector<long> r = c_;
    for (auto& x : r) x *= k;
    return FpPoly(p_, std::move(r));
  }

  std::pair<FpPoly, FpPoly> divmod(const FpPoly& d) const {
    if (d.is_zero()) throw PreconditionError("division by the zero polynomial");
    long inv = inverse_mod(d.leading());
    FpPoly r = *this;
    std::vector<long> q(c_.size() >= d.c_.size() ? c_.size() - d.c_.size() + 1 : 1, 0);
    while (!r.is_zero() && r.degree() >= d.degree()) {
      std::size_t shift = static_cast<std::size_t>(r.degree() - d.degree());
      long f = (r.leading() * inv) % p_;
      q[shift] = f;
      r = r - monomial(p_, f, shift) * d;
    }
    return {FpPoly(p_, std::move(q)), r};
  }

  long evaluate(long x) const {
    long acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = (acc * x + *it) % p_;
    return acc;
  }

  long inverse_mod(long a) const { return to_long(mod_inverse(Integer(a), Integer(p_))); }

  /// Square root in F_p[t] when the polynomial is a perfect square.
  std::optional<FpPoly> sqrt() const {
    if (is_zero()) return FpPoly(p_);
    if (degree() % 2 != 0) return std::nullopt;
    long lc = leading();
    long root_lc = -1;
    for (long x = 1; x < p_; ++x)
      if ((x * x) % p_ == lc) {
        root_lc = x;
        break;
      }
    if (root_lc < 0) return std::nullopt;
    std::size_t m = static_cast<std::size_t>(degree() / 2);
    // match coefficients from the top: g = sum g_i t^i with g_m = root_lc
    std::vector<long> g(m + 1, 0);
    g[m] = root_lc;
    long inv2g = inverse_mod((2 * root_lc) % p_);
    for (std::size_t k = 1; k <= m; ++k) {
      std::size_t deg = 2 * m - k;
      long s = 0;
      for (std::size_t i = m - k + 1; i <= m; ++i) {
        std::size_t j = deg - i;
        if (j >= m - k + 1 && j <= m) s = (s + g[i] * g[j]) % p_;
      }
      g[m - k] = (((coeff(deg) - s) % p_ + p_) % p_ * inv2g) % p_;
    }
    FpPoly root(p_, g);
    if (!(root * root == *this)) return std::nullopt;
    return root;
  }

  std::string to_string(const std::string& var = "t") const {
    if (is_zero()) return "0";
    std::string s;
    for (long i = degree(); i >= 0; --i) {
      long c = coeff(static_cast<std::size_t>(i));
      if (c == 0) continue;
      if (!s.empty()) s += " + ";
      std::string mono = i == 0 ? "" : (i == 1 ? var : var + "^" + std::to_string(i));
      s += mono.empty() ? std::to_string(c) : (c == 1 ? mono : std::to_string(c) + "*" + mono);
    }
    return s;
  }

private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  long p_ = 3;
  std::vector<long> c_;
};

}  // namespace patchwork

#endif  // PATCHWORK_FINITE_FIELD_HPP
