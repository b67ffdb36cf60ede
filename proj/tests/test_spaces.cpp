#include "doctest.h"
#include "pyrafem/spaces.hpp"

using namespace pyrafem;

namespace {

std::size_t dim_reduced_scalar(int k) {  // sum_{c=0..k} (c+1)^2
  std::size_t d = 0;
  for (int c = 0; c <= k; ++c) d += (c + 1) * (c + 1);
  return d;
}

std::size_t dim_reduced_volume(int k) {  // sum_{m=1..k} m^2
  std::size_t d = 0;
  for (int m = 1; m <= k; ++m) d += m * m;
  return d;
}

}  // namespace

TEST_CASE("space dimensions against closed-form counts") {
  for (int k = 1; k <= 3; ++k) {
    CHECK(space_basis(0, k, Family::Underlying).dim() ==
          static_cast<std::size_t>((k + 1) * (k + 1) * k + 1));
    CHECK(space_basis(3, k, Family::Underlying).dim() ==
          static_cast<std::size_t>(k * k * k));
    CHECK(space_basis(0, k, Family::Reduced).dim() == dim_reduced_scalar(k));
    CHECK(space_basis(3, k, Family::Reduced).dim() == dim_reduced_volume(k));
  }
  CHECK(space_basis(0, 1, Family::Reduced).dim() == 5);
  CHECK(space_basis(0, 2, Family::Reduced).dim() == 14);
  CHECK(space_basis(0, 2, Family::Underlying).dim() == 19);
  // lowest-order conforming scalar space carries exactly the vertex dofs
  CHECK(space_basis(0, 1, Family::Conforming).dim() == 5);
}

TEST_CASE("conforming scalar traces are polynomial on every face") {
  for (int k = 1; k <= 3; ++k) {
    const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
    for (const auto& u : conf.basis)
      for (Face f : kAllFaces)
        for (const auto& [key, coeff] : restrict_scalar(u.comp[0], f)) {
          CHECK(key.second >= 0);
          if (f == Face::Base) {
            // quadrilateral trace lives in Q_{k,k}
            CHECK(key.first <= k);
            CHECK(key.second <= k);
          } else {
            CHECK(key.first + key.second <= k);
          }
        }
  }
}

TEST_CASE("normal traces of conforming flux functions are low order") {
  for (int k = 1; k <= 2; ++k) {
    const SpaceBasis& conf = space_basis(2, k, Family::Conforming);
    for (const auto& u : conf.basis)
      for (Face f : kAllFaces)
        for (const auto& keys : face_trace(2, pullback_components(u), f))
          for (const auto& [key, coeff] : keys) {
            CHECK(key.second >= 0);
            if (f == Face::Base) {
              CHECK(key.first <= k - 1);
              CHECK(key.second <= k - 1);
            } else {
              CHECK(key.first + key.second <= k - 1);
            }
          }
  }
}

TEST_CASE("reduced spaces sit inside the underlying spaces") {
  for (int k = 1; k <= 2; ++k)
    for (int s = 0; s <= 3; ++s) {
      const SpaceBasis& U = space_basis(s, k, Family::Underlying);
      for (const auto& u : space_basis(s, k, Family::Reduced).basis)
        CHECK(in_span(U.basis, u));
    }
}

TEST_CASE("exact sequence of reduced spaces") {
  for (int k = 1; k <= 3; ++k) {
    ExactSequenceReport rep = exact_sequence_report(k);
    CHECK(rep.all_ok());
    CHECK(rep.euler_sum == 1);
    CHECK(rep.kernel_dim[0] == 1);  // constants
  }
}

TEST_CASE("exact-weight decomposition reassembles reduced functions") {
  const int k = 2;
  for (int s = 0; s <= 3; ++s) {
    const SpaceBasis& R = space_basis(s, k, Family::Reduced);
    std::size_t total = 0;
    for (const auto& u : R.basis) {
      auto parts = decompose_exact_weight(u, k);
      FormPoly sum = FormPoly::zero(s);
      for (const auto& p : parts) sum = sum + p;
      CHECK(sum == u);
    }
    for (int r = 0; r <= k; ++r)
      total += build_exact_weight_basis(s, k, r).size();
    CHECK(total == R.dim());
  }
}

TEST_CASE("polynomial embedding reproduces reference monomials pointwise") {
  const Rational xi = rat(1, 3), eta = rat(1, 7), zeta = rat(2, 5);
  for (int k = 1; k <= 2; ++k)
    for (int s = 0; s <= 3; ++s) {
      int deg = (s == 0) ? k : k - 1;
      int nc = proxy_count(s);
      for (int slot = 0; slot < nc; ++slot)
        for (int p = 0; p <= deg; ++p)
          for (int q = 0; p + q <= deg; ++q)
            for (int r = 0; p + q + r <= deg; ++r) {
              std::vector<HatPoly> comp(nc);
              comp[slot].add_term({p, q, r}, rat(1));
              FormPoly u = polynomial_embed(s, k, comp);
              auto hat = pullback_components(u);
              Rational expected(1);
              for (int i = 0; i < p; ++i) expected *= xi;
              for (int i = 0; i < q; ++i) expected *= eta;
              for (int i = 0; i < r; ++i) expected *= zeta;
              for (int c = 0; c < nc; ++c)
                CHECK(hat[c].evaluate_reference_exact(xi, eta, zeta) ==
                      (c == slot ? expected : 0));
            }
    }
}

TEST_CASE("embedding rejects out-of-range degrees") {
  std::vector<HatPoly> comp(1);
  comp[0].add_term({2, 0, 0}, rat(1));  // xi^2 is not in the k=1 scalar space
  CHECK_THROWS_AS(polynomial_embed(0, 1, comp), DegreeError);
}
