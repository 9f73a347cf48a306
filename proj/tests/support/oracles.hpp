#ifndef PATCHWORK_TEST_ORACLES_HPP
#define PATCHWORK_TEST_ORACLES_HPP

#include <random>
#include <set>
#include <vector>

#include "patchwork/quadratic_forms.hpp"

namespace patchwork::testgen {

// Independent isotropy oracle over Q_p. After scaling by squares every
// coefficient is p^e * u with e in {0, 1} and u an integer. Then q is isotropic
// iff some x mod p^3 has q(x) = 0 mod p^3 and v(a_i x_i) <= 1 for some i:
// a primitive zero reduces to such an x, and such an x lifts by Hensel since
// v(q(x)) >= 3 > 2 v(2 a_i x_i). The search runs over the sumset of the
// coordinates' contributions, carrying that one flag.
inline bool brute_force_isotropic(const std::vector<Rational>& a, long p) {
  for (const auto& c : a)
    if (c == 0) return true;
  const long m = p * p * p;
  std::set<std::pair<long, bool>> reach{{0, false}};
  for (const auto& c : a) {
    long v = valuation(c, p);
    long e = ((v % 2) + 2) % 2;
    Rational u = c / pow(Rational(p), v);
    long ui = to_long(reduce_mod_prime_power(u, p, 3)) * (e ? p : 1) % m;
    std::set<std::pair<long, bool>> contrib;
    for (long x = 0; x < m; ++x) {
      long vx = x == 0 ? 3 : (x % p != 0 ? 0 : (x % (p * p) != 0 ? 1 : 2));
      contrib.insert({ui * (x * x % m) % m, vx + e <= 1});
    }
    std::set<std::pair<long, bool>> next;
    for (const auto& [r, f] : reach)
      for (const auto& [s, g] : contrib) next.insert({(r + s) % m, f || g});
    reach.swap(next);
  }
  return reach.count({0, true}) > 0;
}

inline DiagonalForm<Rational> random_rational_form(std::mt19937_64& rng, std::size_t dim, long height) {
  std::uniform_int_distribution<long> num(-height, height), den(1, height);
  std::vector<Rational> c;
  while (c.size() < dim) {
    long n = num(rng);
    if (n != 0) c.push_back(make_rational(n, den(rng)));
  }
  return DiagonalForm<Rational>(c);
}

inline ValueVector random_value(std::mt19937_64& rng, std::size_t n, bool integral) {
  static const long dens[] = {1, 2, 3, 4, 6, 8, 12, 16};
  std::uniform_int_distribution<long> num(-12, 12);
  std::uniform_int_distribution<std::size_t> pick(0, 7);
  ValueVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = integral ? Rational(num(rng)) : make_rational(num(rng), dens[pick(rng)]);
  return v;
}

}  // namespace patchwork::testgen

#endif  // PATCHWORK_TEST_ORACLES_HPP
