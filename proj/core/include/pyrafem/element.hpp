#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pyrafem/quadrature.hpp"
#include "pyrafem/spaces.hpp"

namespace pyrafem {

/// Matrix-valued coefficient A^{ab}(x) acting on s-form proxy components.
struct CoefficientTensor {
  int s = 0;
  bool constant = true;
  std::vector<std::vector<Rational>> exact;  // C(3,s) x C(3,s), when constant
  std::function<Eigen::MatrixXd(const Vec3&)> field;
  int smoothness = 0;  // declared smoothness order of a FIELD coefficient

  static CoefficientTensor identity(int s);
  static CoefficientTensor constant_exact(int s,
                                          std::vector<std::vector<Rational>> m);
  static CoefficientTensor from_field(
      int s, std::function<Eigen::MatrixXd(const Vec3&)> f, int smoothness);

  Eigen::MatrixXd eval(const Vec3& x) const;
};

using ElementMatrix = Eigen::MatrixXd;

/// entry(i,j) = S_rule(A(u_i, u_j)) on K: quadrature applied to the
/// covariant pullback A_hat = W^T A W, W the affine weight of phi_K.
ElementMatrix local_bilinear_matrix(const SpaceBasis& basis,
                                    const CoefficientTensor& A,
                                    const AffinePyramid& K,
                                    const PyramidRule& rule);

/// Exact oracle: same bilinear form for constant A via symbolic products
/// and closed-form reference integrals.
RatMatrix analytic_bilinear_matrix(const SpaceBasis& basis,
                                   const CoefficientTensor& A,
                                   const AffinePyramid& K);

/// Evaluable s-form field in physical coordinates: proxy component values
/// and the proxy components of its exterior derivative.
struct FormField {
  int s = 0;
  std::function<Eigen::VectorXd(const Vec3&)> value;
  std::function<Eigen::VectorXd(const Vec3&)> dvalue;  // unused for s = 3
};

FormField scalar_field(std::function<double(const Vec3&)> v,
                       std::function<Vec3(const Vec3&)> grad);

/// max over conforming basis w of |S_k(A(grad v, grad w)) - reference| /
/// ||w||_0 with v the projection-based interpolant of u (s = 0).
double consistency_error_element(const FormField& u,
                                 const CoefficientTensor& A,
                                 const AffinePyramid& K, int k);

// Shared evaluation helpers (also used by interpolation and assembly).

/// Hat-composed component values of u at a reference point.
Eigen::VectorXd eval_hat(const std::vector<RationalPoly>& hat, const Vec3& p);

/// Constant matrix W with u_phys = W * u_hat for the affine map of K.
Eigen::MatrixXd push_weight(const AffinePyramid& K, int s);

}  // namespace pyrafem
