#pragma once

#include <array>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "pyrafem/forms.hpp"

namespace pyrafem {

enum class Family { Underlying, Conforming, Reduced };

/// Ordered basis of one of the element spaces on the reference pyramid.
struct SpaceBasis {
  int s = 0;
  int k = 1;
  Family family = Family::Underlying;
  std::vector<FormPoly> basis;

  std::size_t dim() const { return basis.size(); }
};

SpaceBasis build_underlying_basis(int s, int k);
SpaceBasis build_reduced_basis(int s, int k);
SpaceBasis build_conforming_basis(int s, int k);

/// Cached access; bases are immutable once built.
const SpaceBasis& space_basis(int s, int k, Family family);

/// Exact span membership against a basis.
bool in_span(const std::vector<FormPoly>& basis, const FormPoly& u);

/// Splits u (must lie in R^(s)_k) into its exactly r-weighted parts,
/// r = 0..k.  Parts sum to u exactly.
std::vector<FormPoly> decompose_exact_weight(const FormPoly& u, int k);

/// Basis of X^(s)_{r,k}, assembled from the decomposition of R^(s)_k.
std::vector<FormPoly> build_exact_weight_basis(int s, int k, int r);

/// u_tilde = (w^s_phi)^-1 (p o phi) for polynomial reference components p;
/// asserts membership in R^(s)_k.  p.size() == C(3,s).
FormPoly polynomial_embed(int s, int k, const std::vector<HatPoly>& p);

struct ExactSequenceReport {
  int k;
  std::array<std::size_t, 4> dim_reduced;      // dim R^s_k
  std::array<std::size_t, 3> rank_d;           // rank of grad, curl, div
  std::array<std::size_t, 3> kernel_dim;       // kernel of d on R^s_k
  bool grad_kernel_is_constants;
  bool ker_curl_equals_im_grad;
  bool ker_div_equals_im_curl;
  bool div_surjective;
  long euler_sum;  // alternating dim sum, 1 for an exact sequence

  bool all_ok() const {
    return grad_kernel_is_constants && ker_curl_equals_im_grad &&
           ker_div_equals_im_curl && div_surjective && euler_sum == 1;
  }
};

ExactSequenceReport exact_sequence_report(int k);

// ---- face trace machinery (shared by conforming construction,
//      interpolation and assembly) ----

enum class Face { Base, XiZero, EtaZero, XiSlant, EtaSlant };
constexpr std::array<Face, 5> kAllFaces = {Face::Base, Face::XiZero,
                                           Face::EtaZero, Face::XiSlant,
                                           Face::EtaSlant};
constexpr std::array<Face, 4> kTriangleFaces = {Face::XiZero, Face::EtaZero,
                                                Face::XiSlant, Face::EtaSlant};

/// Trace coefficients in the face key basis.  For lateral faces the key
/// (p, e) denotes s^p (1-tau)^e where s is the in-face parameter and
/// tau = zeta; for the base face (p, e) denotes xi^p eta^e.
using FaceKeys = std::map<std::pair<int, int>, Rational>;

/// Restriction of the reference realization of a canonical RationalPoly.
FaceKeys restrict_scalar(const RationalPoly& hat_composed, Face f);

/// Trace of an s-form on a face, given the hat-composed components
/// (w^s_phi u_tilde).  s=0: restriction (1 entry); s=1: tangential
/// components in face parameters (2 entries); s=2: normal component
/// (1 entry); s=3: no trace (empty).
std::vector<FaceKeys> face_trace(int s, const std::vector<RationalPoly>& hat,
                                 Face f);

/// Reference parameterization of a face: point(s, t) on the pyramid.
Vec3 face_point(Face f, double sp, double tp);
/// Tangent vectors of the parameterization (constant).
std::pair<Vec3, Vec3> face_tangents(Face f);

}  // namespace pyrafem
