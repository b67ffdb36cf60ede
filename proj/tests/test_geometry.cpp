#include "doctest.h"
#include "pyrafem/geometry.hpp"

using namespace pyrafem;

namespace {

AffinePyramid sample_pyramid() {
  return AffinePyramid({rat(1, 2), rat(0), rat(-1, 3)},
                       {rat(1), rat(1, 4), rat(0)},
                       {rat(0), rat(1), rat(1, 2)},
                       {rat(1, 2), rat(1, 2), rat(1)});
}

}  // namespace

TEST_CASE("affine map and vertices") {
  AffinePyramid K = sample_pyramid();
  Vec3 v0 = K.vertex(0);
  CHECK(v0.isApprox(Vec3(0.5, 0.0, -1.0 / 3.0), 1e-14));
  // base vertex 2 = v0 + e1 + e2
  CHECK(K.vertex(2).isApprox(Vec3(1.5, 1.25, 1.0 / 6.0), 1e-14));
  CHECK(K.map(Vec3(0, 0, 1)).isApprox(K.vertex(4), 1e-14));
  CHECK(K.map(Vec3(1, 1, 0)).isApprox(K.vertex(2), 1e-14));
}

TEST_CASE("exact determinant matches the double Jacobian") {
  AffinePyramid K = sample_pyramid();
  CHECK(K.det() == doctest::Approx(K.jacobian().determinant()).epsilon(1e-13));
  CHECK(K.det() != 0.0);
}

TEST_CASE("affine pullback weights satisfy their defining identities") {
  AffinePyramid K = sample_pyramid();
  Mat3 J = K.jacobian();

  auto to_mat = [&](int s) {
    auto w = K.pullback_weight(s);
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = to_double(w[i][j]);
    return m;
  };

  // s=0 and s=3 are scalars
  CHECK(to_double(K.pullback_weight(0)[0][0]) == 1.0);
  CHECK(to_double(K.pullback_weight(3)[0][0]) ==
        doctest::Approx(1.0 / K.det()).epsilon(1e-13));

  // s=1: W = J^{-T}, so J^T W = I
  Mat3 w1 = to_mat(1);
  CHECK((J.transpose() * w1 - Mat3::Identity()).norm() < 1e-12);

  // s=2: cross-product identity (Ja) x (Jb) = det * J^{-T} (a x b),
  // i.e. W2 = J / det maps flux proxies covariantly
  Mat3 w2 = to_mat(2);
  Vec3 a(0.3, -0.7, 0.2), b(1.1, 0.4, -0.5);
  Vec3 lhs = (J * a).cross(J * b);
  Vec3 rhs = K.det() * w1 * a.cross(b);
  CHECK((lhs - rhs).norm() < 1e-12);
  CHECK((w2 - J / K.det()).norm() < 1e-12);
}

TEST_CASE("degenerate pyramid is rejected") {
  CHECK_THROWS_AS(AffinePyramid({rat(0), rat(0), rat(0)},
                                {rat(1), rat(0), rat(0)},
                                {rat(2), rat(0), rat(0)},
                                {rat(0), rat(0), rat(1)}),
                  DegenerateElement);
}

TEST_CASE("symbolic projective weights invert each other") {
  const Rational xi = rat(1, 4), eta = rat(2, 5), zeta = rat(1, 3);
  for (int s = 0; s <= 3; ++s) {
    WeightMatrix W = infinite_weight(s);
    WeightMatrix Wi = infinite_weight_inverse(s);
    int nc = proxy_count(s);
    for (int col = 0; col < nc; ++col) {
      std::vector<RationalPoly> unit(nc);
      unit[col] = RationalPoly::constant(rat(1));
      auto roundtrip = W.apply(Wi.apply(unit));
      for (int row = 0; row < nc; ++row) {
        Rational v = roundtrip[row].evaluate_reference_exact(xi, eta, zeta);
        CHECK(v == (row == col ? 1 : 0));
      }
    }
  }
}

TEST_CASE("shape parameters of the reference pyramid") {
  ShapeParams sp = shape_params(AffinePyramid::reference());
  CHECK(sp.h >= 1.0);
  CHECK(sp.rho >= 1.0);
  CHECK(sp.rho == doctest::Approx(sp.h * sp.h).epsilon(1e-12));
}
