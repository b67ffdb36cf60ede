#include <cmath>

#include "doctest.h"
#include "pyrafem/quadrature.hpp"

using namespace pyrafem;

TEST_CASE("Gauss-Legendre rule on (0,1)") {
  for (int n = 1; n <= 6; ++n) {
    Rule1D r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += r.weights[i] * std::pow(r.nodes[i], d);
      CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Jacobi rules absorb the (1-t)^alpha weight") {
  for (int alpha : {1, 2})
    for (int n = 1; n <= 6; ++n) {
      Rule1D r = gauss_jacobi(n, alpha);
      for (int d = 0; d <= 2 * n - 1; ++d) {
        // int_0^1 (1-t)^alpha t^d dt = d! alpha! / (d+alpha+1)!
        double exact = 1.0;
        for (int j = 1; j <= alpha; ++j) exact *= static_cast<double>(j) / (d + j);
        exact /= (d + alpha + 1);
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += r.weights[i] * std::pow(r.nodes[i], d);
        CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
      }
    }
}

TEST_CASE("conical rule integrates the exactness box") {
  for (int k = 0; k <= 3; ++k) {
    PyramidRule rule = conical_rule(k);
    REQUIRE(rule.points.size() == static_cast<std::size_t>((k + 1) * (k + 1) * (k + 1)));
    for (const auto& p : rule.points) {
      CHECK(p[2] > 0.0);
      CHECK(p[2] < 1.0);
      CHECK(p[0] > 0.0);
      CHECK(p[0] < 1.0 - p[2]);
      CHECK(p[1] < 1.0 - p[2]);
    }
    for (int a = 0; a <= 2 * k + 1; a += k + 1)
      for (int b = 0; b <= 2 * k + 1; b += k + 1)
        for (int c = 0; c <= 2 * k + 1; ++c) {
          RationalPoly p = RationalPoly::monomial({a, b, c});
          double exact = to_double(p.integrate_reference());
          double num = integrate_reference_rule(p, rule);
          CHECK(std::abs(num - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
        }
  }
}

TEST_CASE("quadrature error on an affine pyramid includes the Jacobian") {
  AffinePyramid K({rat(0), rat(0), rat(0)}, {rat(2), rat(0), rat(0)},
                  {rat(0), rat(3), rat(0)}, {rat(1), rat(1), rat(1)});
  RationalPoly p = RationalPoly::monomial({1, 1, 2});
  CHECK(std::abs(quad_error(p, K, conical_rule(2))) < 1e-12);
  // volume: S(1) = |det| / 3
  auto one = [](const Vec3&) { return 1.0; };
  CHECK(integrate_on_pyramid(one, K, conical_rule(1)) ==
        doctest::Approx(6.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("pairwise summation is deterministic and correct") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = 1.0 / (i + 1.0);
  double a = pairwise_sum(v);
  double b = pairwise_sum(v);
  CHECK(a == b);
  double ref = 0.0;
  for (int i = 999; i >= 0; --i) ref += 1.0 / (i + 1.0);
  CHECK(a == doctest::Approx(ref).epsilon(1e-13));
}
