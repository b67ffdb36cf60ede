#pragma once

#include <random>
#include <string>
#include <vector>

#include "pyrafem/meshfem.hpp"

namespace pyrafem {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst residual where a tolerance applies
  std::string detail;
};

/// Deterministic exact random inputs for the Gram-matrix checks.
std::vector<std::vector<Rational>> random_spd_tensor(int s, std::mt19937& rng);
AffinePyramid random_affine_pyramid(std::mt19937& rng);

/// Conical rule of order k integrates every canonical monomial with
/// 0 <= a, b, c <= 2k+1 to 1e-13 relative, k = 0..4.
CheckResult check_quadrature_exactness();

/// Order-k rule Gram matrix equals the exact oracle (1e-12 relative) over
/// the underlying basis: s = 0..3, k = 1..3, 5 random SPD tensors,
/// reference pyramid + 3 random affine pyramids; plus the s=3 variant
/// with the order-(k-1) rule.
std::vector<CheckResult> check_gram_oracle(unsigned seed);

/// Exact structure suite (no tolerances): reduced-in-underlying
/// membership, pullback tensor-space membership, polynomial embeddings,
/// exact sequence ranks, exact-weight decomposition, d(d(u)) = 0.
std::vector<CheckResult> check_structure(int k_max);

/// S_q((d^3/dzeta^3 of xi*eta/(1-zeta))^2), with q points per axis,
/// strictly increases over q = 5, 10, 15, 20 with S_20 > 10 * S_5.
CheckResult check_divergence_counterexample();

/// Squared reference derivatives of exact-weight generators (s = 0)
/// integrate exactly up to total order r+1 and hit the divergent-exponent
/// rule exactly from order r+2 on.
CheckResult check_integrability_ladder(int k_max);

/// Assembled stiffness with constant coefficients is independent of the
/// quadrature order (q = k vs q = k+3, k = 1,2, n = 2; 1e-12 entrywise).
CheckResult check_quadrature_insensitivity();

/// Full suite in a fixed order.
std::vector<CheckResult> run_verification(int k_max, unsigned seed);

}  // namespace pyrafem
