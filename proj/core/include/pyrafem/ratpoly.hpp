#pragma once

#include <compare>
#include <map>
#include <vector>

#include "pyrafem/errors.hpp"
#include "pyrafem/rational.hpp"

namespace pyrafem {

/// One rational monomial x^a y^b (1+z)^-c on the infinite pyramid.
/// Its realization on the reference pyramid is xi^a eta^b (1-zeta)^(c-a-b).
struct Monomial {
  int a = 0;  // power of x, >= 0
  int b = 0;  // power of y, >= 0
  int c = 0;  // power of (1+z)^-1; may go negative during intermediate algebra

  auto operator<=>(const Monomial&) const = default;
};

enum class Axis { X, Y, Z };
enum class HatAxis { Xi, Eta, Zeta };

/// Which weighted tensor-product space a membership query targets.
///   TENSOR(l,m,n,k)    = Q_k^{l,m,n}
///   BRACKET(l,m,k)     = Q_k^{[l,m]}
///   EXACT_WEIGHT(l,m,r)= Q_r^{l,m,0}
struct SpaceSpec {
  enum class Kind { Tensor, Bracket, ExactWeight } kind;
  int l = 0, m = 0, n = 0, k = 0;

  static SpaceSpec tensor(int l, int m, int n, int k) {
    return {Kind::Tensor, l, m, n, k};
  }
  static SpaceSpec bracket(int l, int m, int k) {
    return {Kind::Bracket, l, m, 0, k};
  }
  static SpaceSpec exact_weight(int l, int m, int r) {
    return {Kind::ExactWeight, l, m, 0, r};
  }
};

/// Exact linear combination of rational monomials; zero coefficients are
/// never stored.
class RationalPoly {
 public:
  RationalPoly() = default;

  static RationalPoly constant(const Rational& v);
  static RationalPoly monomial(Monomial m, const Rational& coeff = Rational(1));
  /// x^a y^b z^n / (1+z)^k expanded into canonical terms via z = (1+z) - 1.
  static RationalPoly z_numerator(int a, int b, int n, int k,
                                  const Rational& coeff = Rational(1));

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  RationalPoly& operator+=(const RationalPoly& o);
  RationalPoly& operator-=(const RationalPoly& o);
  friend RationalPoly operator+(RationalPoly l, const RationalPoly& r) {
    l += r;
    return l;
  }
  friend RationalPoly operator-(RationalPoly l, const RationalPoly& r) {
    l -= r;
    return l;
  }
  RationalPoly operator-() const;
  RationalPoly operator*(const RationalPoly& o) const;
  RationalPoly scaled(const Rational& s) const;

  bool operator==(const RationalPoly& o) const { return terms_ == o.terms_; }

  /// Term-wise calculus in infinite pyramid coordinates (x, y, z).
  RationalPoly derivative(Axis axis) const;
  /// Term-wise calculus of the reference realization, in (xi, eta, zeta).
  RationalPoly derivative_hat(HatAxis axis) const;

  bool member_of(const SpaceSpec& spec) const;

  /// Exact integral of the realization over the reference pyramid:
  /// sum coeff / ((a+1)(b+1)(c+3)).  Throws DivergentIntegral if a term
  /// has c <= -3.
  Rational integrate_reference() const;

  double evaluate_reference(double xi, double eta, double zeta) const;
  Rational evaluate_reference_exact(const Rational& xi, const Rational& eta,
                                    const Rational& zeta) const;

  /// Maximum c over stored terms (0 for the zero polynomial).
  int max_weight() const;
  /// Terms with c == r, as a polynomial.
  RationalPoly weight_part(int r) const;

  void add_term(Monomial m, const Rational& coeff);

 private:
  std::map<Monomial, Rational> terms_;
};

/// Polynomial in reference coordinates, stored term-wise as powers of
/// (xi, eta, zeta).  Input carrier for polynomial embedding.
struct HatMonomial {
  int p = 0, q = 0, r = 0;
  auto operator<=>(const HatMonomial&) const = default;
};

class HatPoly {
 public:
  HatPoly() = default;
  void add_term(HatMonomial m, const Rational& coeff);
  const std::map<HatMonomial, Rational>& terms() const { return terms_; }
  int total_degree() const;
  /// Composition with the projective map: xi^p eta^q zeta^r becomes
  /// x^p y^q z^r / (1+z)^(p+q+r), canonicalized.
  RationalPoly compose_projective() const;

 private:
  std::map<HatMonomial, Rational> terms_;
};

}  // namespace pyrafem
