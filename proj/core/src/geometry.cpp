#include "pyrafem/geometry.hpp"

namespace pyrafem {

namespace {

Rational det3(const RatMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

RatMat3 adjugate(const RatMat3& m) {
  RatMat3 a;
  a[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  a[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  a[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  a[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  a[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  a[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  a[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  a[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  a[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return a;
}

}  // namespace

AffinePyramid::AffinePyramid(RatVec3 v0, RatVec3 e1, RatVec3 e2, RatVec3 apex)
    : v0_(std::move(v0)), e1_(std::move(e1)), e2_(std::move(e2)),
      apex_(std::move(apex)) {
  for (int i = 0; i < 3; ++i) {
    jac_[i][0] = e1_[i];
    jac_[i][1] = e2_[i];
    jac_[i][2] = apex_[i] - v0_[i];
  }
  det_ = det3(jac_);
  if (det_ == 0) throw DegenerateElement("pyramid has zero Jacobian determinant");
}

AffinePyramid AffinePyramid::reference() {
  auto z = Rational(0);
  auto o = Rational(1);
  return AffinePyramid({z, z, z}, {o, z, z}, {z, o, z}, {z, z, o});
}

RatMat3 AffinePyramid::jacobian_inverse_exact() const {
  RatMat3 a = adjugate(jac_);
  for (auto& row : a)
    for (auto& x : row) x /= det_;
  return a;
}

Mat3 AffinePyramid::jacobian() const {
  Mat3 j;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) j(i, k) = to_double(jac_[i][k]);
  return j;
}

Vec3 AffinePyramid::map(const Vec3& ref) const {
  Vec3 out;
  for (int i = 0; i < 3; ++i)
    out[i] = to_double(v0_[i]) + ref[0] * to_double(e1_[i]) +
             ref[1] * to_double(e2_[i]) +
             ref[2] * to_double(apex_[i] - v0_[i]);
  return out;
}

Vec3 AffinePyramid::vertex(int i) const {
  switch (i) {
    case 0: return map({0, 0, 0});
    case 1: return map({1, 0, 0});
    case 2: return map({1, 1, 0});
    case 3: return map({0, 1, 0});
    default: return map({0, 0, 1});
  }
}

std::vector<std::vector<Rational>> AffinePyramid::pullback_weight(int s) const {
  // Constant weights of the affine map: w^0 = 1, w^1 = J^-T,
  // w^2 = J / det J, w^3 = 1 / det J.
  switch (s) {
    case 0:
      return {{Rational(1)}};
    case 1: {
      RatMat3 ji = jacobian_inverse_exact();
      std::vector<std::vector<Rational>> w(3, std::vector<Rational>(3));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) w[i][j] = ji[j][i];
      return w;
    }
    case 2: {
      std::vector<std::vector<Rational>> w(3, std::vector<Rational>(3));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) w[i][j] = jac_[i][j] / det_;
      return w;
    }
    case 3:
      return {{1 / det_}};
    default:
      throw DegreeError("form degree must be 0..3");
  }
}

ShapeParams shape_params(const AffinePyramid& K) {
  Eigen::JacobiSVD<Mat3> svd(K.jacobian());
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(2);
  if (smin <= 0.0) throw DegenerateElement("singular Jacobian");
  return {smax, smax / smin};
}

std::vector<RationalPoly> WeightMatrix::apply(
    const std::vector<RationalPoly>& u) const {
  std::vector<RationalPoly> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = 0; j < entries[i].size(); ++j)
      out[i] += entries[i][j] * u[j];
  return out;
}

namespace {

RationalPoly mono(int a, int b, int c, long num = 1, long den = 1) {
  return RationalPoly::monomial({a, b, c}, rat(num, den));
}

}  // namespace

WeightMatrix infinite_weight(int s) {
  WeightMatrix w{s, {}};
  RationalPoly zero;
  switch (s) {
    case 0:
      w.entries = {{mono(0, 0, 0)}};
      break;
    case 1:
      // (1+z) [[1,0,0],[0,1,0],[x,y,1+z]]
      w.entries = {{mono(0, 0, -1), zero, zero},
                   {zero, mono(0, 0, -1), zero},
                   {mono(1, 0, -1), mono(0, 1, -1), mono(0, 0, -2)}};
      break;
    case 2:
      // (1+z)^2 [[1+z,0,-x],[0,1+z,-y],[0,0,1]]
      w.entries = {{mono(0, 0, -3), zero, mono(1, 0, -2, -1)},
                   {zero, mono(0, 0, -3), mono(0, 1, -2, -1)},
                   {zero, zero, mono(0, 0, -2)}};
      break;
    case 3:
      w.entries = {{mono(0, 0, -4)}};
      break;
    default:
      throw DegreeError("form degree must be 0..3");
  }
  return w;
}

WeightMatrix infinite_weight_inverse(int s) {
  WeightMatrix w{s, {}};
  RationalPoly zero;
  switch (s) {
    case 0:
      w.entries = {{mono(0, 0, 0)}};
      break;
    case 1:
      // (1+z)^-2 [[1+z,0,0],[0,1+z,0],[-x,-y,1]]
      w.entries = {{mono(0, 0, 1), zero, zero},
                   {zero, mono(0, 0, 1), zero},
                   {mono(1, 0, 2, -1), mono(0, 1, 2, -1), mono(0, 0, 2)}};
      break;
    case 2:
      // (1+z)^-3 [[1,0,x],[0,1,y],[0,0,1+z]]
      w.entries = {{mono(0, 0, 3), zero, mono(1, 0, 3)},
                   {zero, mono(0, 0, 3), mono(0, 1, 3)},
                   {zero, zero, mono(0, 0, 2)}};
      break;
    case 3:
      w.entries = {{mono(0, 0, 4)}};
      break;
    default:
      throw DegreeError("form degree must be 0..3");
  }
  return w;
}

std::vector<std::vector<RationalPoly>> projective_jacobian() {
  // D phi for phi(x,y,z) = (x, y, z)/(1+z).
  RationalPoly zero;
  return {{mono(0, 0, 1), zero, mono(1, 0, 2, -1)},
          {zero, mono(0, 0, 1), mono(0, 1, 2, -1)},
          {zero, zero, mono(0, 0, 2)}};
}

}  // namespace pyrafem
