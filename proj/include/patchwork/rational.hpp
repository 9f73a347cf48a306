#ifndef PATCHWORK_RATIONAL_HPP
#define PATCHWORK_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patchwork {

using Integer = mpz_class;
using Rational = mpq_class;

/// Raised when an operation's mathematical precondition does not hold.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline Rational make_rational(const Integer& num, const Integer& den = 1) {
  if (den == 0) throw PreconditionError("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational make_rational(long num, long den = 1) {
  return make_rational(Integer(num), Integer(den));
}

/// Canonical text form: "n" for integers, "n/d" otherwise.
inline std::string to_string(const Rational& q) { return q.get_str(); }
inline std::string to_string(const Integer& z) { return z.get_str(); }

/// Parses "n", "-n", "n/d". Whitespace around the literal is ignored.
inline Rational parse_rational(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ' && ch != '\t' && ch != '\n') s.push_back(ch);
  if (s.empty()) throw PreconditionError("empty rational literal");
  auto slash = s.find('/');
  auto parse_int = [](const std::string& part) {
    if (part.empty()) throw PreconditionError("malformed rational literal");
    std::size_t start = (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (start == part.size()) throw PreconditionError("malformed rational literal");
    for (std::size_t i = start; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') throw PreconditionError("malformed rational literal: " + part);
    return Integer(part[0] == '+' ? part.substr(1) : part);
  };
  if (slash == std::string::npos) return Rational(parse_int(s));
  return make_rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
}

inline Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer ceil_of(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer gcd(const Integer& a, const Integer& b) {
  Integer r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Integer pow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Rational pow(const Rational& base, long e) {
  if (e < 0) {
    if (base == 0) throw PreconditionError("negative power of zero");
    Rational inv = 1 / base;
    return pow(inv, -e);
  }
  Rational r(pow(Integer(base.get_num()), static_cast<unsigned long>(e)),
             pow(Integer(base.get_den()), static_cast<unsigned long>(e)));
  return r;
}

inline Integer ipow(long base, unsigned long e) { return pow(Integer(base), e); }

/// Non-negative remainder of a modulo m.
inline Integer mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Integer mod_inverse(const Integer& a, const Integer& m) {
  Integer r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
    throw PreconditionError("element is not invertible modulo " + m.get_str());
  return r;
}

inline long to_long(const Integer& z) {
  if (!z.fits_slong_p()) throw PreconditionError("integer out of machine range: " + z.get_str());
  return z.get_si();
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Exact p-adic valuation of a non-zero integer.
inline long valuation(const Integer& z, long p) {
  if (z == 0) throw PreconditionError("valuation of zero");
  Integer t = z;
  long v = 0;
  Integer P(p);
  while (mpz_divisible_p(t.get_mpz_t(), P.get_mpz_t())) {
    mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), P.get_mpz_t());
    ++v;
  }
  return v;
}

inline long valuation(const Rational& q, long p) {
  if (q == 0) throw PreconditionError("valuation of zero");
  return valuation(Integer(q.get_num()), p) - valuation(Integer(q.get_den()), p);
}

/// q / p^v_p(q); numerator and denominator are prime to p.
inline Rational unit_part(const Rational& q, long p) {
  long v = valuation(q, p);
  return q / pow(Rational(p), v);
}

/// Image of a p-integral rational in Z/p^k, as a representative in [0, p^k).
inline Integer reduce_mod_prime_power(const Rational& q, long p, unsigned long k) {
  Integer modulus = ipow(p, k);
  Integer den(q.get_den());
  if (mpz_divisible_ui_p(den.get_mpz_t(), static_cast<unsigned long>(p)))
    throw PreconditionError("rational is not p-integral");
  Integer num(q.get_num());
  return mod(num * mod_inverse(den, modulus), modulus);
}

/// Legendre symbol (a | p) for an odd prime p; 0 when p divides a.
inline int legendre(const Integer& a, long p) {
  return mpz_legendre(mod(a, Integer(p)).get_mpz_t(), Integer(p).get_mpz_t());
}

inline bool is_probable_prime(long p) {
  return p >= 2 && mpz_probab_prime_p(Integer(p).get_mpz_t(), 30) > 0;
}

inline void require_odd_prime(long p) {
  if (p == 2 || !is_probable_prime(p)) throw PreconditionError("an odd prime is required, got " + std::to_string(p));
}

/// Exact square root of a non-negative rational, when it is a rational square.
inline bool rational_sqrt(const Rational& q, Rational& root) {
  if (q < 0) return false;
  Integer n(q.get_num()), d(q.get_den());
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  Integer rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  root = make_rational(rn, rd);
  return true;
}

}  // namespace patchwork

#endif  // PATCHWORK_RATIONAL_HPP
