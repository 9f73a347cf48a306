#ifndef PATCHWORK_PADIC_HPP
#define PATCHWORK_PADIC_HPP

#include <algorithm>
#include <optional>
#include <string>

#include "patchwork/rational.hpp"

namespace patchwork {

/// An element of Q_p given exactly by a rational.
struct PadicScalar {
  Rational value;
  long prime = 3;
  std::optional<long> precision;

  PadicScalar() = default;
  PadicScalar(Rational v, long p, std::optional<long> n = std::nullopt) : value(std::move(v)), prime(p), precision(n) {
    require_odd_prime(p);
  }

  bool is_zero() const { return value == 0; }
  long valuation() const { return patchwork::valuation(value, prime); }
  Rational unit() const { return unit_part(value, prime); }
};

inline long padic_valuation(const Rational& x, long p) {
  require_odd_prime(p);
  return valuation(x, p);
}

/// Class of x in Q_p^x / (Q_p^x)^2 for odd p.
struct SquareClass {
  bool val_parity = false;  // v_p(x) odd
  bool unit_class = false;  // unit part is a non-square mod p

  friend SquareClass operator*(SquareClass a, SquareClass b) {
    return {a.val_parity != b.val_parity, a.unit_class != b.unit_class};
  }
  friend bool operator==(const SquareClass&, const SquareClass&) = default;
};

inline SquareClass square_class(const Rational& x, long p) {
  require_odd_prime(p);
  if (x == 0) throw PreconditionError("square class of zero");
  long v = valuation(x, p);
  Rational u = unit_part(x, p);
  Integer residue = reduce_mod_prime_power(u, p, 1);
  return {v % 2 != 0, legendre(residue, p) != 1};
}

inline bool is_padic_square(const Rational& x, long p) {
  if (x == 0) return true;
  SquareClass c = square_class(x, p);
  return !c.val_parity && !c.unit_class;
}

/// Square root of a p-adic unit modulo p^n, normalised so that its first digit
/// lies in [1, (p-1)/2]. Returns nothing when u is not a square mod p.
inline std::optional<Integer> hensel_sqrt(const Rational& u, long p, unsigned long n) {
  require_odd_prime(p);
  if (u == 0 || valuation(u, p) != 0) throw PreconditionError("hensel_sqrt needs a p-adic unit");
  if (n == 0) throw PreconditionError("hensel_sqrt needs positive precision");
  Integer P(p);
  Integer target = reduce_mod_prime_power(u, p, n);
  Integer r0 = mod(target, P);
  if (legendre(r0, p) != 1) return std::nullopt;

  Integer s;
  for (Integer x = 1; x <= (p - 1) / 2; ++x)
    if (mod(x * x, P) == r0) {
      s = x;
      break;
    }
  // Newton: s <- s - (s^2 - u) / (2s), precision doubling each round
  unsigned long prec = 1;
  while (prec < n) {
    prec = std::min(2 * prec, n);
    Integer m = ipow(p, prec);
    Integer t = mod(target, m);
    Integer inv = mod_inverse(mod(2 * s, m), m);
    s = mod(s - (s * s - t) * inv, m);
  }
  return s;
}

}  // namespace patchwork

#endif  // PATCHWORK_PADIC_HPP
