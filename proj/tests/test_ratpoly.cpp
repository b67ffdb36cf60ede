#include "doctest.h"
#include "pyrafem/ratpoly.hpp"

using namespace pyrafem;

namespace {

// Independent oracle for the reference integral of one canonical monomial:
// iterate the xi/eta integrals, then expand (1-zeta)^(c+2) binomially.
Rational monomial_integral_oracle(int a, int b, int c) {
  Rational zpart(0);
  for (int j = 0; j <= c + 2; ++j)
    zpart += binomial(c + 2, j) * Rational((j % 2) ? -1 : 1, j + 1);
  return zpart / ((a + 1) * (b + 1));
}

}  // namespace

TEST_CASE("monomial reference integral matches iterated-integration oracle") {
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = -2; c <= 6; ++c) {
        RationalPoly p = RationalPoly::monomial({a, b, c}, rat(7, 3));
        CHECK(p.integrate_reference() ==
              rat(7, 3) * monomial_integral_oracle(a, b, c));
      }
}

TEST_CASE("integration diverges exactly for weight exponent <= -3") {
  CHECK_THROWS_AS(RationalPoly::monomial({0, 0, -3}).integrate_reference(),
                  DivergentIntegral);
  CHECK_THROWS_AS(RationalPoly::monomial({2, 2, -4}).integrate_reference(),
                  DivergentIntegral);
  CHECK_NOTHROW(RationalPoly::monomial({0, 0, -2}).integrate_reference());
}

TEST_CASE("z_numerator realization agrees with the projective map") {
  // realization of x^a y^b z^n / (1+z)^k is
  // xi^a eta^b zeta^n (1-zeta)^(k-a-b-n)
  const Rational xi = rat(1, 3), eta = rat(1, 5), zeta = rat(2, 7);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int nn = 0; nn <= 2; ++nn)
        for (int k = 0; k <= 4; ++k) {
          RationalPoly p = RationalPoly::z_numerator(a, b, nn, k);
          Rational expected(1);
          for (int i = 0; i < a; ++i) expected *= xi;
          for (int i = 0; i < b; ++i) expected *= eta;
          for (int i = 0; i < nn; ++i) expected *= zeta;
          int e = k - a - b - nn;
          Rational om = 1 - zeta;
          for (int i = 0; i < e; ++i) expected *= om;
          for (int i = 0; i < -e; ++i) expected /= om;
          CHECK(p.evaluate_reference_exact(xi, eta, zeta) == expected);
        }
}

TEST_CASE("derivatives in infinite coordinates") {
  // d/dz of x^2 y (1+z)^-3 = -3 x^2 y (1+z)^-4
  RationalPoly p = RationalPoly::monomial({2, 1, 3});
  CHECK(p.derivative(Axis::Z) == RationalPoly::monomial({2, 1, 4}, -3));
  CHECK(p.derivative(Axis::X) == RationalPoly::monomial({1, 1, 3}, 2));
  CHECK(p.derivative(Axis::Y) == RationalPoly::monomial({2, 0, 3}));
}

TEST_CASE("reference derivatives match finite differences") {
  RationalPoly p = RationalPoly::monomial({1, 1, 1}) +
                   RationalPoly::monomial({2, 0, 3}, rat(-1, 2));
  const double x = 0.31, y = 0.22, z = 0.4, h = 1e-6;
  auto fd = [&](double fx1, double fx0) { return (fx1 - fx0) / (2 * h); };
  CHECK(p.derivative_hat(HatAxis::Xi).evaluate_reference(x, y, z) ==
        doctest::Approx(fd(p.evaluate_reference(x + h, y, z),
                           p.evaluate_reference(x - h, y, z)))
            .epsilon(1e-5));
  CHECK(p.derivative_hat(HatAxis::Eta).evaluate_reference(x, y, z) ==
        doctest::Approx(fd(p.evaluate_reference(x, y + h, z),
                           p.evaluate_reference(x, y - h, z)))
            .epsilon(1e-5));
  CHECK(p.derivative_hat(HatAxis::Zeta).evaluate_reference(x, y, z) ==
        doctest::Approx(fd(p.evaluate_reference(x, y, z + h),
                           p.evaluate_reference(x, y, z - h)))
            .epsilon(1e-5));
}

TEST_CASE("weighted tensor space membership") {
  RationalPoly p = RationalPoly::z_numerator(1, 0, 1, 2);
  CHECK(p.member_of(SpaceSpec::tensor(1, 0, 1, 2)));
  CHECK(p.member_of(SpaceSpec::tensor(1, 1, 1, 2)));
  CHECK_FALSE(p.member_of(SpaceSpec::tensor(0, 0, 1, 2)));
  CHECK_FALSE(p.member_of(SpaceSpec::tensor(1, 0, 0, 2)));

  // Q_k^{[l,m]}: x^a y^b / (1+z)^c with a <= c+l-k, b <= c+m-k
  RationalPoly q = RationalPoly::monomial({1, 0, 1});
  CHECK(q.member_of(SpaceSpec::bracket(1, 1, 1)));
  CHECK_FALSE(q.member_of(SpaceSpec::bracket(0, 1, 1)));
  CHECK_FALSE(RationalPoly::monomial({1, 0, 0}).member_of(
      SpaceSpec::bracket(1, 1, 1)));
}

TEST_CASE("projective composition of reference polynomials") {
  HatPoly h;
  h.add_term({2, 0, 1}, rat(3));
  CHECK(h.compose_projective() == RationalPoly::z_numerator(2, 0, 1, 3, rat(3)));

  HatPoly lin;
  lin.add_term({0, 0, 0}, rat(1));
  lin.add_term({0, 0, 1}, rat(-1));  // 1 - zeta
  // (1 - zeta) o phi = 1/(1+z)
  CHECK(lin.compose_projective() == RationalPoly::monomial({0, 0, 1}));
}
