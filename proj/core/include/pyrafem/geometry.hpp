#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "pyrafem/errors.hpp"
#include "pyrafem/ratpoly.hpp"

namespace pyrafem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using RatVec3 = std::array<Rational, 3>;
using RatMat3 = std::array<std::array<Rational, 3>, 3>;

inline int proxy_count(int s) { return (s == 0 || s == 3) ? 1 : 3; }

/// Parallelogram-based pyramid stored as (v0, e1, e2, apex).  Coordinates
/// are exact so the affine pullback weights stay exact for the oracle path.
class AffinePyramid {
 public:
  AffinePyramid(RatVec3 v0, RatVec3 e1, RatVec3 e2, RatVec3 apex);

  static AffinePyramid reference();

  const RatVec3& v0() const { return v0_; }
  const RatVec3& e1() const { return e1_; }
  const RatVec3& e2() const { return e2_; }
  const RatVec3& apex() const { return apex_; }

  /// Columns [e1 | e2 | apex - v0]; constant for the affine map.
  const RatMat3& jacobian_exact() const { return jac_; }
  const Rational& det_exact() const { return det_; }
  RatMat3 jacobian_inverse_exact() const;

  Mat3 jacobian() const;
  double det() const { return to_double(det_); }

  Vec3 map(const Vec3& ref) const;
  Vec3 vertex(int i) const;  // 0..3 base (ccw), 4 apex

  /// Exact constant pullback weight w^s of the affine map, and |det|.
  std::vector<std::vector<Rational>> pullback_weight(int s) const;

 private:
  RatVec3 v0_, e1_, e2_, apex_;
  RatMat3 jac_;
  Rational det_;
};

struct ShapeParams {
  double h;    // spectral norm of the Jacobian
  double rho;  // h * spectral norm of the inverse Jacobian
};

ShapeParams shape_params(const AffinePyramid& K);

/// Symbolic pullback weight matrix of the projective map phi for s-forms,
/// entries are RationalPoly in infinite pyramid coordinates.
struct WeightMatrix {
  int s;
  std::vector<std::vector<RationalPoly>> entries;  // C(3,s) x C(3,s)

  std::vector<RationalPoly> apply(const std::vector<RationalPoly>& u) const;
};

/// w^s_phi and its exact inverse.
WeightMatrix infinite_weight(int s);
WeightMatrix infinite_weight_inverse(int s);

/// Jacobian of the projective map phi itself, symbolic in (x, y, z).
std::vector<std::vector<RationalPoly>> projective_jacobian();

}  // namespace pyrafem
