#ifndef PATCHWORK_VALUE_VECTOR_HPP
#define PATCHWORK_VALUE_VECTOR_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "patchwork/rational.hpp"

namespace patchwork {

/// Exponents (p_1, ..., p_n) of a value prod |pi_i|^{p_i} over a fixed basis.
struct ValueVector {
  std::vector<Rational> coords;

  ValueVector() = default;
  explicit ValueVector(std::size_t n) : coords(n, Rational(0)) {}
  ValueVector(std::initializer_list<Rational> xs) : coords(xs) {}
  explicit ValueVector(std::vector<Rational> xs) : coords(std::move(xs)) {}

  std::size_t size() const { return coords.size(); }
  const Rational& operator[](std::size_t i) const { return coords[i]; }
  Rational& operator[](std::size_t i) { return coords[i]; }

  bool is_zero() const {
    for (const auto& c : coords)
      if (c != 0) return false;
    return true;
  }

  ValueVector& operator+=(const ValueVector& o) {
    check_rank(o);
    for (std::size_t i = 0; i < size(); ++i) coords[i] += o.coords[i];
    return *this;
  }
  ValueVector& operator-=(const ValueVector& o) {
    check_rank(o);
    for (std::size_t i = 0; i < size(); ++i) coords[i] -= o.coords[i];
    return *this;
  }
  friend ValueVector operator+(ValueVector a, const ValueVector& b) { return a += b; }
  friend ValueVector operator-(ValueVector a, const ValueVector& b) { return a -= b; }
  friend ValueVector operator*(const Rational& k, ValueVector v) {
    for (auto& c : v.coords) c *= k;
    return v;
  }
  friend bool operator==(const ValueVector& a, const ValueVector& b) { return a.coords == b.coords; }

  static ValueVector unit(std::size_t n, std::size_t i) {
    ValueVector v(n);
    v.coords[i] = 1;
    return v;
  }

private:
  void check_rank(const ValueVector& o) const {
    if (o.size() != size()) throw PreconditionError("value vectors of different rank");
  }
};

inline std::string to_string(const ValueVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += to_string(v[i]);
  }
  return s + ")";
}

struct OrderBaseData {
  Integer order;
  std::optional<std::size_t> base_index;  // smallest i with v_i = 1/order
};

inline Integer order_of(const ValueVector& v) {
  Integer r = 1;
  for (const auto& c : v.coords) r = lcm(r, Integer(c.get_den()));
  return r;
}

inline OrderBaseData order_base(const ValueVector& v) {
  OrderBaseData d{order_of(v), std::nullopt};
  Rational target(1, 1);
  target /= d.order;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == target) {
      d.base_index = i;
      break;
    }
  return d;
}

/// Records v' = v + 2 (k v + c): the reduced vector differs from v by the
/// double of an element of the group generated by the basis and v.
struct SquareCertificate {
  Integer k = 0;
  std::vector<Integer> c;
};

struct Reduction {
  ValueVector vector;
  std::optional<std::size_t> base_index;
  SquareCertificate certificate;
};

/// v + 2 (k v + c), the vector a certificate claims.
inline ValueVector apply_certificate(const ValueVector& v, const SquareCertificate& cert) {
  if (cert.c.size() != v.size()) throw PreconditionError("certificate rank mismatch");
  ValueVector out = v;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] += 2 * (Rational(cert.k) * v[i] + Rational(cert.c[i]));
  return out;
}

inline bool verify_reduction(const ValueVector& v, const Reduction& r) {
  return apply_certificate(v, r.certificate) == r.vector;
}

inline Reduction reduce_odd_order(const ValueVector& v) {
  Integer alpha = order_of(v);
  if (mpz_even_p(alpha.get_mpz_t())) throw PreconditionError("reduce_odd_order needs odd order, got " + alpha.get_str());
  Reduction r;
  r.vector = ValueVector(v.size());
  r.certificate.k = (alpha - 1) / 2;
  r.certificate.c.assign(v.size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    Integer s(Rational(alpha * v[i]));
    Integer delta = mod(s, Integer(2));
    r.vector[i] = delta;
    r.certificate.c[i] = -(s - delta) / 2;
  }
  return r;
}

namespace detail {

// Base change at index i0 for a vector of order z * 2^y, z odd, y >= 1, where
// e = 2^y z v has e_{i0} odd. Solves A e_{i0} + 2^y B = 1 with A odd.
inline Reduction even_reduction_at(const ValueVector& v, const Integer& z, unsigned long y, std::size_t i0) {
  Integer two_y = pow(Integer(2), y);
  std::vector<Integer> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = Integer(Rational(two_y * z * v[i]));
  Integer A = (two_y == 1) ? Integer(1) : mod_inverse(mod(e[i0], two_y), two_y);
  Integer B = (1 - A * e[i0]) / two_y;

  Reduction r;
  r.base_index = i0;
  r.certificate.c.assign(v.size(), 0);
  Integer mult;    // v' = mult * v + shift * unit(i0)
  Integer shift;
  if (mpz_even_p(B.get_mpz_t())) {
    mult = z * A;
    shift = B;
  } else {
    // B odd: use A' = A (1 + 2^y), B' = (B + 1)(1 + 2^y) - 2 - 2^y, which is even
    mult = z * A * (1 + two_y);
    shift = (B + 1) * (1 + two_y) - 2 - two_y;
  }
  r.certificate.k = (mult - 1) / 2;
  r.certificate.c[i0] = shift / 2;
  r.vector = Rational(mult) * v;
  r.vector[i0] += shift;
  return r;
}

inline unsigned long two_adic_valuation(const Integer& a) {
  return mpz_scan1(a.get_mpz_t(), 0);
}

}  // namespace detail

/// Even-order reduction: returns v' = (x_1/2^y, ..., x_n/2^y) with x_{i0} = 1.
/// i0 is the smallest index already of the form 1/2^y after odd scaling, else
/// the smallest index whose scaled numerator is odd.
inline Reduction reduce_even_order(const ValueVector& v) {
  Integer alpha = order_of(v);
  if (mpz_odd_p(alpha.get_mpz_t())) throw PreconditionError("reduce_even_order needs even order, got " + alpha.get_str());
  unsigned long y = detail::two_adic_valuation(alpha);
  Integer z = alpha >> y;
  Integer two_y = pow(Integer(2), y);

  std::optional<std::size_t> one, odd;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Integer e(Rational(alpha * v[i]));
    if (e == 1 && !one) one = i;
    if (mpz_odd_p(e.get_mpz_t()) && !odd) odd = i;
  }
  std::size_t i0 = one ? *one : *odd;
  return detail::even_reduction_at(v, z, y, i0);
}

/// Re-expresses v (of order 2^nu) so that its base is coordinate i.
inline Reduction rebase(const ValueVector& v, std::size_t i) {
  if (i >= v.size()) throw PreconditionError("rebase index out of range");
  Integer alpha = order_of(v);
  unsigned long y = detail::two_adic_valuation(alpha);
  if ((alpha >> y) != 1) throw PreconditionError("rebase needs order a power of two, got " + alpha.get_str());
  Integer nu(Rational(alpha * v[i]));
  if (mpz_even_p(nu.get_mpz_t()))
    throw PreconditionError("rebase target coordinate has even scaled numerator " + nu.get_str());
  return detail::even_reduction_at(v, 1, y, i);
}

}  // namespace patchwork

#endif  // PATCHWORK_VALUE_VECTOR_HPP
