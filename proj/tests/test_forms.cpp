#include "doctest.h"
#include "pyrafem/forms.hpp"

using namespace pyrafem;

namespace {

FormPoly sample_scalar() {
  FormPoly u = FormPoly::zero(0);
  u.comp[0] = RationalPoly::monomial({1, 1, 2}) +
              RationalPoly::z_numerator(0, 1, 1, 2, rat(3, 2));
  return u;
}

FormPoly sample_one_form() {
  FormPoly u = FormPoly::zero(1);
  u.comp[0] = RationalPoly::monomial({0, 2, 1});
  u.comp[1] = RationalPoly::z_numerator(1, 0, 1, 3);
  u.comp[2] = RationalPoly::monomial({1, 1, 2}, rat(-2));
  return u;
}

}  // namespace

TEST_CASE("gradient components") {
  FormPoly u = FormPoly::zero(0);
  u.comp[0] = RationalPoly::monomial({2, 0, 1});
  FormPoly g = exterior_derivative(u);
  CHECK(g.s == 1);
  CHECK(g.comp[0] == RationalPoly::monomial({1, 0, 1}, 2));
  CHECK(g.comp[1].is_zero());
  CHECK(g.comp[2] == RationalPoly::monomial({2, 0, 2}, -1));
}

TEST_CASE("d after d vanishes") {
  CHECK(exterior_derivative(exterior_derivative(sample_scalar())).is_zero());
  CHECK(exterior_derivative(exterior_derivative(sample_one_form())).is_zero());
}

TEST_CASE("no exterior derivative past volume forms") {
  CHECK_THROWS_AS(exterior_derivative(FormPoly::zero(3)), DegreeError);
}

TEST_CASE("scalar pullback is the identity weight") {
  FormPoly u = sample_scalar();
  auto hat = pullback_components(u);
  REQUIRE(hat.size() == 1);
  CHECK(hat[0] == u.comp[0]);
}

TEST_CASE("monomial index flattens and unflattens exactly") {
  FormPoly u = sample_one_form();
  MonomialIndex idx(1);
  idx.absorb(u);
  auto flat = idx.flatten(u);
  CHECK(flat.size() == idx.size());
  CHECK(idx.unflatten(flat) == u);
}
