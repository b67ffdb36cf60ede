#pragma once

#include "pyrafem/element.hpp"

namespace pyrafem {

/// Projection-based interpolant onto the conforming space: entity-wise
/// variational conditions (vertices/edges/faces/interior for s=0,
/// tangential edge/face/interior for s=1, normal face/interior for s=2,
/// L2 projection for s=3), assembled into one least-squares system over
/// the conforming basis coefficients.
struct Interpolant {
  int s = 0;
  int k = 1;
  Eigen::VectorXd coeffs;  // over space_basis(s, k, Conforming)
};

Interpolant interpolate_form(const FormField& u, int k, const AffinePyramid& K);

/// Coefficient vector shorthand.
Eigen::VectorXd interpolate(const FormField& u, int k, const AffinePyramid& K);

/// Cached hat-composed components of the conforming basis and of its
/// exterior derivative (the latter only for s <= 2).
const std::vector<std::vector<RationalPoly>>& conforming_hats(int s, int k);
const std::vector<std::vector<RationalPoly>>& conforming_dhats(int s, int k);

/// Hat component values of the interpolant (resp. of its exterior
/// derivative) at a reference point.
Eigen::VectorXd interpolant_hat(const Interpolant& v, const Vec3& ref);
Eigen::VectorXd interpolant_dhat(const Interpolant& v, const Vec3& ref);

/// Subspace of the conforming space with vanishing trace on all five
/// faces (trace sense depending on s); cached.
const std::vector<FormPoly>& interior_bubbles(int s, int k);

}  // namespace pyrafem
