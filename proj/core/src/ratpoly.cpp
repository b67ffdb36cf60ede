#include "pyrafem/ratpoly.hpp"

#include <cmath>

namespace pyrafem {

void RationalPoly::add_term(Monomial m, const Rational& coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

RationalPoly RationalPoly::constant(const Rational& v) {
  RationalPoly p;
  p.add_term({0, 0, 0}, v);
  return p;
}

RationalPoly RationalPoly::monomial(Monomial m, const Rational& coeff) {
  RationalPoly p;
  p.add_term(m, coeff);
  return p;
}

RationalPoly RationalPoly::z_numerator(int a, int b, int n, int k,
                                       const Rational& coeff) {
  // z^n = ((1+z) - 1)^n = sum_i C(n,i) (1+z)^i (-1)^(n-i)
  RationalPoly p;
  for (int i = 0; i <= n; ++i) {
    Rational c = binomial(n, i) * coeff;
    if ((n - i) % 2 != 0) c = -c;
    p.add_term({a, b, k - i}, c);
  }
  return p;
}

RationalPoly& RationalPoly::operator+=(const RationalPoly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

RationalPoly& RationalPoly::operator-=(const RationalPoly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

RationalPoly RationalPoly::operator-() const {
  RationalPoly p;
  for (const auto& [m, c] : terms_) p.terms_.emplace(m, -c);
  return p;
}

RationalPoly RationalPoly::operator*(const RationalPoly& o) const {
  RationalPoly p;
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_)
      p.add_term({m1.a + m2.a, m1.b + m2.b, m1.c + m2.c}, c1 * c2);
  return p;
}

RationalPoly RationalPoly::scaled(const Rational& s) const {
  RationalPoly p;
  if (s == 0) return p;
  for (const auto& [m, c] : terms_) p.terms_.emplace(m, c * s);
  return p;
}

RationalPoly RationalPoly::derivative(Axis axis) const {
  RationalPoly p;
  for (const auto& [m, c] : terms_) {
    switch (axis) {
      case Axis::X:
        if (m.a > 0) p.add_term({m.a - 1, m.b, m.c}, c * m.a);
        break;
      case Axis::Y:
        if (m.b > 0) p.add_term({m.a, m.b - 1, m.c}, c * m.b);
        break;
      case Axis::Z:
        if (m.c != 0) p.add_term({m.a, m.b, m.c + 1}, c * -m.c);
        break;
    }
  }
  return p;
}

RationalPoly RationalPoly::derivative_hat(HatAxis axis) const {
  // realization xi^a eta^b (1-zeta)^e with e = c - a - b
  RationalPoly p;
  for (const auto& [m, c] : terms_) {
    int e = m.c - m.a - m.b;
    switch (axis) {
      case HatAxis::Xi:
        if (m.a > 0) p.add_term({m.a - 1, m.b, m.c - 1}, c * m.a);
        break;
      case HatAxis::Eta:
        if (m.b > 0) p.add_term({m.a, m.b - 1, m.c - 1}, c * m.b);
        break;
      case HatAxis::Zeta:
        if (e != 0) p.add_term({m.a, m.b, m.c - 1}, c * -e);
        break;
    }
  }
  return p;
}

bool RationalPoly::member_of(const SpaceSpec& spec) const {
  switch (spec.kind) {
    case SpaceSpec::Kind::Tensor: {
      // Q_k^{l,m,n}: negative l, m or n denotes the zero space.
      if (spec.l < 0 || spec.m < 0 || spec.n < 0) return is_zero();
      for (const auto& [mo, c] : terms_) {
        (void)c;
        if (mo.a > spec.l || mo.b > spec.m) return false;
        if (mo.c > spec.k || mo.c < spec.k - spec.n) return false;
      }
      return true;
    }
    case SpaceSpec::Kind::Bracket: {
      for (const auto& [mo, c] : terms_) {
        (void)c;
        if (mo.c < 0 || mo.c > spec.k) return false;
        if (mo.a > mo.c + spec.l - spec.k) return false;
        if (mo.b > mo.c + spec.m - spec.k) return false;
      }
      return true;
    }
    case SpaceSpec::Kind::ExactWeight: {
      if (spec.l < 0 || spec.m < 0) return is_zero();
      for (const auto& [mo, c] : terms_) {
        (void)c;
        if (mo.c != spec.k) return false;
        if (mo.a > spec.l || mo.b > spec.m) return false;
      }
      return true;
    }
  }
  return false;
}

Rational RationalPoly::integrate_reference() const {
  Rational total(0);
  for (const auto& [m, c] : terms_) {
    if (m.c <= -3)
      throw DivergentIntegral("integrate_reference: term with c = " +
                              std::to_string(m.c) + " <= -3 diverges");
    total += c / Rational((m.a + 1) * (m.b + 1) * (m.c + 3));
  }
  return total;
}

namespace {

double ipow(double base, int e) {
  if (e == 0) return 1.0;
  if (e < 0) return 1.0 / ipow(base, -e);
  double r = 1.0, p = base;
  while (e > 0) {
    if (e & 1) r *= p;
    p *= p;
    e >>= 1;
  }
  return r;
}

Rational ipow(const Rational& base, int e) {
  if (e == 0) return Rational(1);
  bool neg = e < 0;
  unsigned long n = static_cast<unsigned long>(neg ? -static_cast<long>(e) : e);
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), n);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), n);
  r.canonicalize();
  if (neg) r = 1 / r;
  return r;
}

}  // namespace

double RationalPoly::evaluate_reference(double xi, double eta,
                                        double zeta) const {
  double total = 0.0;
  const double omz = 1.0 - zeta;
  for (const auto& [m, c] : terms_) {
    int e = m.c - m.a - m.b;
    if (omz == 0.0 && e < 0)
      throw SingularEvaluation("evaluate_reference: pole at zeta = 1");
    total += to_double(c) * ipow(xi, m.a) * ipow(eta, m.b) * ipow(omz, e);
  }
  return total;
}

Rational RationalPoly::evaluate_reference_exact(const Rational& xi,
                                                const Rational& eta,
                                                const Rational& zeta) const {
  Rational total(0);
  Rational omz = 1 - zeta;
  for (const auto& [m, c] : terms_) {
    int e = m.c - m.a - m.b;
    if (omz == 0 && e < 0)
      throw SingularEvaluation("evaluate_reference_exact: pole at zeta = 1");
    total += c * ipow(xi, m.a) * ipow(eta, m.b) * ipow(omz, e);
  }
  return total;
}

int RationalPoly::max_weight() const {
  int w = 0;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    (void)c;
    if (first || m.c > w) w = m.c;
    first = false;
  }
  return w;
}

RationalPoly RationalPoly::weight_part(int r) const {
  RationalPoly p;
  for (const auto& [m, c] : terms_)
    if (m.c == r) p.add_term(m, c);
  return p;
}

void HatPoly::add_term(HatMonomial m, const Rational& coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

int HatPoly::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) {
    (void)c;
    d = std::max(d, m.p + m.q + m.r);
  }
  return d;
}

RationalPoly HatPoly::compose_projective() const {
  RationalPoly out;
  for (const auto& [m, c] : terms_)
    out += RationalPoly::z_numerator(m.p, m.q, m.r, m.p + m.q + m.r, c);
  return out;
}

}  // namespace pyrafem
