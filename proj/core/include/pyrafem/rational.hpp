#pragma once

#include <gmpxx.h>

#include <string>

namespace pyrafem {

// Exact coefficients. mpq_class keeps values canonical (lowest terms,
// positive denominator) as long as construction goes through canonicalize().
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Rational binomial(long n, long k) {
  if (k < 0 || k > n) return Rational(0);
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return Rational(b);
}

}  // namespace pyrafem
