#include <cmath>

#include "doctest.h"
#include "pyrafem/interpolate.hpp"

using namespace pyrafem;

namespace {

AffinePyramid skew_pyramid() {
  return AffinePyramid({rat(0), rat(0), rat(0)},
                       {rat(1), rat(1, 4), rat(0)},
                       {rat(0), rat(1), rat(1, 5)},
                       {rat(1, 3), rat(1, 2), rat(1)});
}

// FormField wrapping an exact member of the conforming space on K, so the
// interpolant must reproduce its coefficient vector.
FormField member_field(int s, int k, const Eigen::VectorXd& c,
                       const AffinePyramid& K) {
  const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
  const auto& hats = conforming_hats(s, k);
  static const std::vector<std::vector<RationalPoly>> kNoDhats;
  const auto& dhats = s < 3 ? conforming_dhats(s, k) : kNoDhats;
  Eigen::MatrixXd W = push_weight(K, s);
  Eigen::MatrixXd Wd = s < 3 ? push_weight(K, s + 1) : Eigen::MatrixXd();
  Mat3 J = K.jacobian();
  Mat3 Ji = J.inverse();

  FormField f;
  f.s = s;
  f.value = [=, &conf](const Vec3& x) {
    Vec3 ref = Ji * (x - Vec3(K.vertex(0)));
    if (s == 0 && ref[2] > 1.0 - 1e-12) {
      // apex value: only the constant canonical term survives
      Eigen::VectorXd v(1);
      double acc = 0.0;
      for (std::size_t i = 0; i < conf.dim(); ++i) {
        auto it = conf.basis[i].comp[0].terms().find(Monomial{0, 0, 0});
        if (it != conf.basis[i].comp[0].terms().end())
          acc += c(i) * to_double(it->second);
      }
      v(0) = acc;
      return v;
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(proxy_count(s));
    for (std::size_t i = 0; i < conf.dim(); ++i)
      v += c(i) * (W * eval_hat(hats[i], ref));
    return v;
  };
  f.dvalue = [=](const Vec3& x) {
    Vec3 ref = Ji * (x - Vec3(K.vertex(0)));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(proxy_count(s + 1));
    for (std::size_t i = 0; i < dhats.size(); ++i)
      v += c(i) * (Wd * eval_hat(dhats[i], ref));
    return v;
  };
  return f;
}

}  // namespace

TEST_CASE("interpolation reproduces conforming members") {
  AffinePyramid K = skew_pyramid();
  for (int s = 0; s <= 3; ++s)
    for (int k = 1; k <= 2; ++k) {
      const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
      Eigen::VectorXd c(conf.dim());
      for (std::size_t i = 0; i < conf.dim(); ++i)
        c(i) = 0.3 + 0.7 * std::sin(1.0 + static_cast<double>(i));
      FormField f = member_field(s, k, c, K);
      Eigen::VectorXd ci = interpolate(f, k, K);
      REQUIRE(ci.size() == c.size());
      CHECK((ci - c).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("interpolation commutes with the gradient") {
  AffinePyramid K = skew_pyramid();
  const double pi = 3.14159265358979323846;
  FormField u0 = scalar_field(
      [=](const Vec3& x) {
        return std::sin(pi * x[0]) * std::cos(0.5 * x[1]) * (1.0 + x[2]);
      },
      [=](const Vec3& x) {
        return Vec3(
            pi * std::cos(pi * x[0]) * std::cos(0.5 * x[1]) * (1.0 + x[2]),
            -0.5 * std::sin(pi * x[0]) * std::sin(0.5 * x[1]) * (1.0 + x[2]),
            std::sin(pi * x[0]) * std::cos(0.5 * x[1]));
      });
  FormField u1;
  u1.s = 1;
  u1.value = u0.dvalue;
  u1.dvalue = [](const Vec3&) { return Eigen::VectorXd::Zero(3); };  // curl grad

  for (int k = 1; k <= 2; ++k) {
    Interpolant p0 = interpolate_form(u0, k, K);
    Interpolant p1 = interpolate_form(u1, k, K);
    for (const Vec3& ref :
         {Vec3(0.2, 0.3, 0.1), Vec3(0.5, 0.1, 0.4), Vec3(0.1, 0.6, 0.25)}) {
      Eigen::VectorXd a = interpolant_dhat(p0, ref);
      Eigen::VectorXd b = interpolant_hat(p1, ref);
      // the gap is the quadrature error of the (k+4)-point rows on
      // transcendental data, not a structural mismatch
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("interior bubbles have vanishing traces") {
  for (int s = 0; s <= 2; ++s)
    for (int k = 1; k <= 2; ++k)
      for (const auto& b : interior_bubbles(s, k))
        for (Face f : kAllFaces)
          for (const auto& keys : face_trace(s, pullback_components(b), f))
            CHECK(keys.empty());
}
