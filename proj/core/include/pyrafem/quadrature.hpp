#pragma once

#include <functional>
#include <vector>

#include "pyrafem/geometry.hpp"
#include "pyrafem/ratpoly.hpp"

namespace pyrafem {

/// 1D rule on (0,1).  Sum of weights equals the integral of the rule's
/// weight function: 1 for Legendre, 1/3 for Jacobi(2,0).
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule exact for polynomials of degree <= 2n-1 on [0,1].
Rule1D gauss_legendre(int n);

/// n-point rule with sum_i w_i h(t_i) = int_0^1 (1-t)^alpha h(t) dt exact
/// for h of degree <= 2n-1.  Golub-Welsch on the shifted Jacobi recurrence.
Rule1D gauss_jacobi(int n, int alpha);

inline Rule1D gauss_jacobi20(int n) { return gauss_jacobi(n, 2); }

/// Conical product rule on the reference pyramid, (k+1)^3 points.
struct PyramidRule {
  int order;
  std::vector<Vec3> points;  // (xi, eta, zeta), strictly interior
  std::vector<double> weights;
};

PyramidRule conical_rule(int k);

/// Deterministic pairwise summation.
double pairwise_sum(std::vector<double> v);

/// S rule applied to a scalar callable in reference coordinates.
double integrate_reference_rule(const std::function<double(const Vec3&)>& f,
                                const PyramidRule& rule);
double integrate_reference_rule(const RationalPoly& p, const PyramidRule& rule);

/// S_{k,K}(f) = |det J_K| * S_{k,Khat}(f o phi_K) for f in physical coords.
double integrate_on_pyramid(const std::function<double(const Vec3&)>& f,
                            const AffinePyramid& K, const PyramidRule& rule);

/// S_{k,K}(p) - |det J_K| * integral of p over the reference pyramid,
/// where p is given by its reference realization.
double quad_error(const RationalPoly& p, const AffinePyramid& K,
                  const PyramidRule& rule);

}  // namespace pyrafem
