#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "pyrafem/element.hpp"

using namespace pyrafem;

namespace {

AffinePyramid skew_pyramid() {
  return AffinePyramid({rat(-1, 2), rat(1, 3), rat(0)},
                       {rat(1), rat(1, 2), rat(0)},
                       {rat(-1, 4), rat(1), rat(1, 3)},
                       {rat(0), rat(1, 2), rat(1)});
}

double rel_gap(const ElementMatrix& num, const RatMatrix& exact) {
  double scale = 1.0, worst = 0.0;
  for (std::size_t i = 0; i < exact.rows(); ++i)
    for (std::size_t j = 0; j < exact.cols(); ++j)
      scale = std::max(scale, std::abs(to_double(exact(i, j))));
  for (std::size_t i = 0; i < exact.rows(); ++i)
    for (std::size_t j = 0; j < exact.cols(); ++j)
      worst = std::max(worst,
                       std::abs(num(i, j) - to_double(exact(i, j))) / scale);
  return worst;
}

}  // namespace

TEST_CASE("order-k rule reproduces the exact Gram oracle") {
  for (int s = 0; s <= 3; ++s)
    for (int k = 1; k <= 2; ++k) {
      const SpaceBasis& basis = space_basis(s, k, Family::Underlying);
      CoefficientTensor A = CoefficientTensor::identity(s);
      for (const AffinePyramid& K :
           {AffinePyramid::reference(), skew_pyramid()}) {
        ElementMatrix num = local_bilinear_matrix(basis, A, K, conical_rule(k));
        RatMatrix exact = analytic_bilinear_matrix(basis, A, K);
        CHECK(rel_gap(num, exact) <= 1e-12);
      }
    }
}

TEST_CASE("exact Gram matrix is symmetric positive definite") {
  const SpaceBasis& basis = space_basis(1, 2, Family::Underlying);
  CoefficientTensor A = CoefficientTensor::identity(1);
  RatMatrix m = analytic_bilinear_matrix(basis, A, skew_pyramid());
  Eigen::MatrixXd md(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      CHECK(m(i, j) == m(j, i));
      md(i, j) = to_double(m(i, j));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(md);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("non-constant coefficients are rejected by the oracle") {
  CoefficientTensor A = CoefficientTensor::from_field(
      0, [](const Vec3& x) { return Eigen::MatrixXd::Constant(1, 1, x[0]); },
      1);
  CHECK_THROWS_AS(analytic_bilinear_matrix(
                      space_basis(0, 1, Family::Underlying), A,
                      AffinePyramid::reference()),
                  DimensionMismatch);
}

TEST_CASE("element consistency error vanishes for constant coefficients") {
  FormField u = scalar_field(
      [](const Vec3& x) { return std::sin(x[0]) * std::cos(x[1]) + x[2]; },
      [](const Vec3& x) {
        return Vec3(std::cos(x[0]) * std::cos(x[1]),
                    -std::sin(x[0]) * std::sin(x[1]), 1.0);
      });
  CoefficientTensor A = CoefficientTensor::identity(1);
  for (int k = 1; k <= 2; ++k)
    CHECK(consistency_error_element(u, A, skew_pyramid(), k) <= 1e-10);
}
