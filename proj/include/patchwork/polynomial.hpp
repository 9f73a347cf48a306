#ifndef PATCHWORK_POLYNOMIAL_HPP
#define PATCHWORK_POLYNOMIAL_HPP

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patchwork/exponent.hpp"
#include "patchwork/rational.hpp"

namespace patchwork {

/// Dense univariate polynomial over Q, coefficients from degree 0 upward.
class Polynomial {
public:
  Polynomial() = default;
  Polynomial(Rational c) {
    if (c != 0) c_.push_back(std::move(c));
  }
  Polynomial(long c) : Polynomial(Rational(c)) {}
  explicit Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial variable() { return Polynomial(std::vector<Rational>{0, 1}); }
  static Polynomial monomial(const Rational& c, std::size_t deg) {
    std::vector<Rational> v(deg + 1, Rational(0));
    v[deg] = c;
    return Polynomial(std::move(v));
  }

  bool is_zero() const { return c_.empty(); }
  /// Degree, with -1 for the zero polynomial.
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  Polynomial operator-() const { return Polynomial() - *this; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

  /// Euclidean division: *this = q * d + r with deg r < deg d.
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const {
    if (d.is_zero()) throw PreconditionError("polynomial division by zero");
    Polynomial r = *this;
    std::vector<Rational> q(c_.size() >= d.c_.size() ? c_.size() - d.c_.size() + 1 : 0, Rational(0));
    while (!r.is_zero() && r.degree() >= d.degree()) {
      std::size_t shift = static_cast<std::size_t>(r.degree() - d.degree());
      Rational f = r.leading() / d.leading();
      q[shift] = f;
      r -= monomial(f, shift) * d;
    }
    return {Polynomial(std::move(q)), r};
  }

  Polynomial monic() const {
    if (is_zero()) return *this;
    Polynomial m = *this;
    Rational l = leading();
    for (auto& x : m.c_) x /= l;
    return m;
  }

  Rational evaluate(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// Coefficients of f(X + c), i.e. the expansion of f in powers of (T - c).
  Polynomial taylor_shift(const Rational& c) const {
    std::vector<Rational> b = c_;
    // repeated synthetic division by (X - c)
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      for (std::size_t i = b.size() - 1; i > k; --i) b[i - 1] += c * b[i];
    return Polynomial(std::move(b));
  }

  /// X^deg f(1/X).
  Polynomial reversed() const {
    std::vector<Rational> b(c_.rbegin(), c_.rend());
    return Polynomial(std::move(b));
  }

private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline Polynomial gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    auto r = a.divmod(b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

inline std::string to_string(const Polynomial& f, const std::string& var = "T") {
  if (f.is_zero()) return "0";
  std::string s;
  for (long i = f.degree(); i >= 0; --i) {
    Rational c = f.coeff(static_cast<std::size_t>(i));
    if (c == 0) continue;
    bool neg = c < 0;
    Rational a = neg ? Rational(-c) : c;
    if (s.empty())
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    std::string mono = i == 0 ? "" : (i == 1 ? var : var + "^" + std::to_string(i));
    if (mono.empty())
      s += to_string(a);
    else if (a == 1)
      s += mono;
    else
      s += to_string(a) + "*" + mono;
  }
  return s;
}

/// Element of Q(T), kept with gcd(num, den) = 1 and den monic.
class RationalFunction {
public:
  RationalFunction() : den_(1) {}
  RationalFunction(Polynomial num) : num_(std::move(num)), den_(1) {}
  RationalFunction(Rational c) : num_(std::move(c)), den_(1) {}
  RationalFunction(long c) : num_(c), den_(1) {}
  RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

  static RationalFunction variable() { return RationalFunction(Polynomial::variable()); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  RationalFunction operator-() const { return {-num_, den_}; }
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    if (b.is_zero()) throw PreconditionError("division by the zero rational function");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  RationalFunction pow(long e) const {
    if (e < 0) return RationalFunction(1) / pow(-e);
    RationalFunction r(1), base = *this;
    while (e > 0) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  Rational evaluate(const Rational& x) const {
    Rational d = den_.evaluate(x);
    if (d == 0) throw PreconditionError("rational function has a pole at " + to_string(x));
    return num_.evaluate(x) / d;
  }

  /// f(1/T), used to move the point at infinity to the origin.
  RationalFunction invert_variable() const {
    long dn = num_.degree(), dd = den_.degree();
    Polynomial n = num_.reversed(), d = den_.reversed();
    // f(1/T) = T^{dd - dn} * n / d
    if (dd >= dn) n = n * Polynomial::monomial(1, static_cast<std::size_t>(dd - dn));
    else d = d * Polynomial::monomial(1, static_cast<std::size_t>(dn - dd));
    return {n, d};
  }

private:
  void normalize() {
    if (den_.is_zero()) throw PreconditionError("zero denominator");
    if (num_.is_zero()) {
      den_ = Polynomial(1);
      return;
    }
    Polynomial g = gcd(num_, den_);
    if (g.degree() > 0) {
      num_ = num_.divmod(g).first;
      den_ = den_.divmod(g).first;
    }
    Rational l = den_.leading();
    if (l != 1) {
      num_ = num_ * Polynomial(Rational(1 / l));
      den_ = den_.monic();
    }
  }
  Polynomial num_;
  Polynomial den_;
};

inline std::string to_string(const RationalFunction& f, const std::string& var = "T") {
  if (f.den() == Polynomial(1)) return to_string(f.num(), var);
  auto wrap = [&](const Polynomial& p) {
    std::string s = to_string(p, var);
    bool simple = p.degree() <= 0 || (p.coeffs().size() >= 1 && s.find(' ') == std::string::npos);
    return simple ? s : "(" + s + ")";
  };
  return wrap(f.num()) + "/" + wrap(f.den());
}

namespace detail {

class ExpressionParser {
public:
  ExpressionParser(std::string_view text, std::string_view vars) : s_(text), vars_(vars) {}

  RationalFunction parse() {
    RationalFunction r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return r;
  }

private:
  [[noreturn]] void fail(const std::string& why) const {
    throw PreconditionError("parse error at offset " + std::to_string(pos_) + ": " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char ch) {
    skip();
    return pos_ < s_.size() && s_[pos_] == ch;
  }
  bool starts_atom() {
    skip();
    if (pos_ >= s_.size()) return false;
    char ch = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(ch)) || ch == '(' || vars_.find(ch) != std::string_view::npos;
  }

  RationalFunction expr() {
    RationalFunction acc = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        acc = acc + term();
      } else if (peek('-')) {
        ++pos_;
        acc = acc - term();
      } else {
        return acc;
      }
    }
  }

  RationalFunction term() {
    RationalFunction acc = unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        acc = acc * unary();
      } else if (peek('/')) {
        ++pos_;
        acc = acc / unary();
      } else if (starts_atom()) {
        acc = acc * power();  // juxtaposition, e.g. "3T"
      } else {
        return acc;
      }
    }
  }

  RationalFunction unary() {
    if (peek('-')) {
      ++pos_;
      return -unary();
    }
    if (peek('+')) {
      ++pos_;
      return unary();
    }
    return power();
  }

  RationalFunction power() {
    RationalFunction base = atom();
    if (peek('^')) {
      ++pos_;
      skip();
      bool neg = false;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
        neg = s_[pos_] == '-';
        ++pos_;
      }
      Integer e = integer_literal();
      long k = to_long(e);
      return base.pow(neg ? -k : k);
    }
    return base;
  }

  Integer integer_literal() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return Integer(std::string(s_.substr(start, pos_ - start)));
  }

  RationalFunction atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char ch = s_[pos_];
    if (ch == '(') {
      ++pos_;
      RationalFunction r = expr();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
      return r;
    }
    if (vars_.find(ch) != std::string_view::npos) {
      ++pos_;
      return RationalFunction::variable();
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) return RationalFunction(Rational(integer_literal()));
    fail(std::string("unexpected '") + ch + "'");
  }

  std::string_view s_;
  std::string_view vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses literals, T, + - * / ^ and parentheses. `vars` lists the accepted
/// spellings of the variable.
inline RationalFunction parse_rational_function(std::string_view text, std::string_view vars = "T") {
  return detail::ExpressionParser(text, vars).parse();
}

/// min_j v_p(b_j) + j * log_radius, where f = sum b_j (T - c)^j.
inline Exponent gauss_valuation(const Polynomial& f, long p, const Rational& c, const Exponent& log_radius) {
  if (f.is_zero()) throw PreconditionError("Gauss norm of the zero polynomial");
  Polynomial g = f.taylor_shift(c);
  std::optional<Exponent> best;
  for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
    const Rational& b = g.coeffs()[j];
    if (b == 0) continue;
    Exponent e = Exponent(Rational(valuation(b, p))) + Rational(static_cast<long>(j)) * log_radius;
    if (!best || e < *best) best = e;
  }
  return *best;
}

/// Log-norm of f at the point eta_{c, r} with r = p^(-log_radius); |f| = p^(-result).
inline Exponent point_norm(const RationalFunction& f, long p, const Rational& c, const Exponent& log_radius) {
  require_odd_prime(p);
  if (f.is_zero()) throw PreconditionError("point norm of the zero function");
  return gauss_valuation(f.num(), p, c, log_radius) - gauss_valuation(f.den(), p, c, log_radius);
}

}  // namespace patchwork

#endif  // PATCHWORK_POLYNOMIAL_HPP
