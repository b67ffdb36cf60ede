#pragma once

#include <vector>

#include "pyrafem/geometry.hpp"
#include "pyrafem/linalg.hpp"
#include "pyrafem/ratpoly.hpp"

namespace pyrafem {

/// An s-form given by the C(3,s) proxy components of its infinite-pyramid
/// representation.  Proxy ordering: s=1 -> (u1,u2,u3); s=2 -> (u23,-u13,u12).
struct FormPoly {
  int s = 0;
  std::vector<RationalPoly> comp;

  FormPoly() = default;
  FormPoly(int s_, std::vector<RationalPoly> c) : s(s_), comp(std::move(c)) {}

  static FormPoly zero(int s) {
    return FormPoly(s, std::vector<RationalPoly>(proxy_count(s)));
  }

  bool is_zero() const;
  FormPoly operator+(const FormPoly& o) const;
  FormPoly operator-(const FormPoly& o) const;
  FormPoly scaled(const Rational& r) const;
  bool operator==(const FormPoly& o) const { return s == o.s && comp == o.comp; }
};

/// grad / curl / div in infinite pyramid coordinates.  Throws DegreeError
/// for s = 3.
FormPoly exterior_derivative(const FormPoly& u);

/// Reference components composed with phi: u_hat o phi = w^s_phi * u_tilde.
std::vector<RationalPoly> pullback_components(const FormPoly& u);

/// Indexing of the monomials appearing across a set of forms, used to
/// flatten FormPoly into exact coefficient vectors.
class MonomialIndex {
 public:
  explicit MonomialIndex(int s) : s_(s) {}

  /// Registers every monomial of u (call for all vectors before flatten).
  void absorb(const FormPoly& u);
  std::size_t size() const { return index_.size() * proxy_count(s_); }
  std::vector<Rational> flatten(const FormPoly& u) const;
  FormPoly unflatten(const std::vector<Rational>& v) const;

 private:
  int s_;
  std::map<Monomial, std::size_t> index_;
  std::vector<Monomial> monomials_;
};

}  // namespace pyrafem
