#include "pyrafem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pyrafem/errors.hpp"

namespace pyrafem {

namespace {

Rational random_rational(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-3, 3);
  std::uniform_int_distribution<int> den(1, 4);
  return Rational(num(rng), den(rng));
}

double max_abs(const RatMatrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      r = std::max(r, std::abs(to_double(m(i, j))));
  return r;
}

}  // namespace

std::vector<std::vector<Rational>> random_spd_tensor(int s, std::mt19937& rng) {
  int n = proxy_count(s);
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = random_rational(rng);
  // A = M^T M + I is SPD for any M
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) a[i][j] += m[l][i] * m[l][j];
      if (i == j) a[i][j] += 1;
    }
  return a;
}

AffinePyramid random_affine_pyramid(std::mt19937& rng) {
  for (;;) {
    RatVec3 v0, e1, e2, d;
    for (int i = 0; i < 3; ++i) {
      v0[i] = random_rational(rng);
      e1[i] = random_rational(rng);
      e2[i] = random_rational(rng);
      d[i] = random_rational(rng);
    }
    Rational det = e1[0] * (e2[1] * d[2] - e2[2] * d[1]) -
                   e2[0] * (e1[1] * d[2] - e1[2] * d[1]) +
                   d[0] * (e1[1] * e2[2] - e1[2] * e2[1]);
    if (det == 0) continue;
    RatVec3 apex = {v0[0] + d[0], v0[1] + d[1], v0[2] + d[2]};
    return AffinePyramid(v0, e1, e2, apex);
  }
}

CheckResult check_quadrature_exactness() {
  CheckResult r;
  r.name = "quadrature_exactness";
  double worst = 0.0;
  AffinePyramid ref = AffinePyramid::reference();
  for (int k = 0; k <= 4; ++k) {
    PyramidRule rule = conical_rule(k);
    for (int a = 0; a <= 2 * k + 1; ++a)
      for (int b = 0; b <= 2 * k + 1; ++b)
        for (int c = 0; c <= 2 * k + 1; ++c) {
          RationalPoly p = RationalPoly::monomial({a, b, c});
          double exact = to_double(p.integrate_reference());
          double err =
              std::abs(quad_error(p, ref, rule)) / std::max(1.0, std::abs(exact));
          worst = std::max(worst, err);
        }
  }
  r.worst = worst;
  r.pass = worst <= 1e-13;
  return r;
}

std::vector<CheckResult> check_gram_oracle(unsigned seed) {
  std::vector<CheckResult> out;
  std::mt19937 rng(seed);

  auto run_case = [&](int s, int k, int q) {
    double worst = 0.0;
    const SpaceBasis& basis = space_basis(s, k, Family::Underlying);
    std::vector<CoefficientTensor> tensors;
    for (int t = 0; t < 5; ++t)
      tensors.push_back(
          CoefficientTensor::constant_exact(s, random_spd_tensor(s, rng)));
    std::vector<AffinePyramid> pyramids = {AffinePyramid::reference()};
    for (int p = 0; p < 3; ++p) pyramids.push_back(random_affine_pyramid(rng));

    PyramidRule rule = conical_rule(q);
    for (const auto& K : pyramids)
      for (const auto& A : tensors) {
        ElementMatrix num = local_bilinear_matrix(basis, A, K, rule);
        RatMatrix exact = analytic_bilinear_matrix(basis, A, K);
        double scale = std::max(1.0, max_abs(exact));
        for (std::size_t i = 0; i < basis.dim(); ++i)
          for (std::size_t j = 0; j < basis.dim(); ++j)
            worst = std::max(
                worst, std::abs(num(i, j) - to_double(exact(i, j))) / scale);
      }
    return worst;
  };

  for (int s = 0; s <= 3; ++s) {
    CheckResult r;
    r.name = "gram_oracle_s" + std::to_string(s);
    for (int k = 1; k <= 3; ++k) r.worst = std::max(r.worst, run_case(s, k, k));
    r.pass = r.worst <= 1e-12;
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "gram_oracle_s3_reduced_rule";
    for (int k = 1; k <= 3; ++k)
      r.worst = std::max(r.worst, run_case(3, k, k - 1));
    r.pass = r.worst <= 1e-12;
    out.push_back(r);
  }
  return out;
}

namespace {

std::vector<HatPoly> hat_unit(int s, int slot, const HatMonomial& m) {
  std::vector<HatPoly> p(proxy_count(s));
  p[slot].add_term(m, Rational(1));
  return p;
}

bool embeddings_ok(int k, std::string& why) {
  for (int s = 0; s <= 3; ++s) {
    int deg = (s == 0) ? k : k - 1;
    int slots = proxy_count(s);
    for (int slot = 0; slot < slots; ++slot)
      for (int p = 0; p <= deg; ++p)
        for (int q = 0; p + q <= deg; ++q)
          for (int rr = 0; p + q + rr <= deg; ++rr) {
            try {
              polynomial_embed(s, k, hat_unit(s, slot, {p, q, rr}));
            } catch (const NotInSpace&) {
              std::ostringstream os;
              os << "s=" << s << " slot=" << slot << " monomial (" << p << ","
                 << q << "," << rr << ") k=" << k;
              why = os.str();
              return false;
            }
          }
  }
  return true;
}

}  // namespace

std::vector<CheckResult> check_structure(int k_max) {
  CheckResult inclusion{"reduced_in_underlying", true, 0.0, ""};
  CheckResult pullback{"pullback_tensor_membership", true, 0.0, ""};
  CheckResult embed{"polynomial_embedding", true, 0.0, ""};
  CheckResult sequence{"exact_sequence", true, 0.0, ""};
  CheckResult decomp{"weight_decomposition", true, 0.0, ""};
  CheckResult dd{"d_after_d_zero", true, 0.0, ""};

  for (int k = 1; k <= k_max; ++k) {
    for (int s = 0; s <= 3; ++s) {
      const SpaceBasis& U = space_basis(s, k, Family::Underlying);
      const SpaceBasis& R = space_basis(s, k, Family::Reduced);

      for (const auto& u : R.basis)
        if (!in_span(U.basis, u)) {
          inclusion.pass = false;
          inclusion.detail = "s=" + std::to_string(s) + " k=" + std::to_string(k);
        }

      SpaceSpec box = SpaceSpec::tensor(k, k, k, k);
      for (const auto& u : U.basis)
        for (const auto& comp : pullback_components(u))
          if (!comp.member_of(box)) {
            pullback.pass = false;
            pullback.detail = "s=" + std::to_string(s) + " k=" + std::to_string(k);
          }

      std::size_t total = 0;
      for (const auto& u : R.basis) {
        auto parts = decompose_exact_weight(u, k);
        FormPoly sum = FormPoly::zero(s);
        for (const auto& part : parts) sum = sum + part;
        if (!(sum == u)) {
          decomp.pass = false;
          decomp.detail = "sum mismatch s=" + std::to_string(s) +
                          " k=" + std::to_string(k);
        }
      }
      for (int rr = 0; rr <= k; ++rr)
        total += build_exact_weight_basis(s, k, rr).size();
      if (total != R.dim()) {
        decomp.pass = false;
        decomp.detail = "dim sum s=" + std::to_string(s) + " k=" + std::to_string(k);
      }

      if (s <= 1)
        for (const auto& u : R.basis)
          if (!exterior_derivative(exterior_derivative(u)).is_zero()) {
            dd.pass = false;
            dd.detail = "s=" + std::to_string(s) + " k=" + std::to_string(k);
          }
    }

    std::string why;
    if (!embeddings_ok(k, why)) {
      embed.pass = false;
      embed.detail = why;
    }

    if (!exact_sequence_report(k).all_ok()) {
      sequence.pass = false;
      sequence.detail = "k=" + std::to_string(k);
    }
  }

  return {inclusion, pullback, embed, sequence, decomp, dd};
}

CheckResult check_divergence_counterexample() {
  CheckResult r;
  r.name = "divergence_counterexample";
  RationalPoly v = RationalPoly::monomial({1, 1, 1});
  RationalPoly d3 = v.derivative_hat(HatAxis::Zeta)
                        .derivative_hat(HatAxis::Zeta)
                        .derivative_hat(HatAxis::Zeta);
  RationalPoly sq = d3 * d3;
  std::vector<double> s;
  // q counts points per axis, so the rule of order q-1
  for (int q : {5, 10, 15, 20})
    s.push_back(integrate_reference_rule(sq, conical_rule(q - 1)));
  bool increasing = s[0] < s[1] && s[1] < s[2] && s[2] < s[3];
  r.pass = increasing && s[3] > 10.0 * s[0];
  std::ostringstream os;
  os << "S_5=" << s[0] << " S_20=" << s[3];
  r.detail = os.str();
  return r;
}

CheckResult check_integrability_ladder(int k_max) {
  CheckResult res;
  res.name = "integrability_ladder";
  res.pass = true;
  int divergent_seen = 0;

  for (int k = 1; k <= k_max; ++k)
    for (int r = 0; r <= k; ++r) {
      auto gens = build_exact_weight_basis(0, k, r);
      for (const auto& g : gens) {
        // all derivatives up to total order r+2
        std::vector<RationalPoly> level = {g.comp[0]};
        for (int order = 0; order <= r + 2 && res.pass; ++order) {
          for (const auto& d : level) {
            if (d.is_zero()) continue;
            RationalPoly sq = d * d;
            int cmin = 0;
            for (const auto& [m, coeff] : sq.terms()) cmin = std::min(cmin, m.c);
            bool expect_divergent = cmin <= -3;
            bool threw = false;
            try {
              sq.integrate_reference();
            } catch (const DivergentIntegral&) {
              threw = true;
            }
            if (threw != expect_divergent || expect_divergent != (order >= r + 2)) {
              res.pass = false;
              res.detail = "k=" + std::to_string(k) + " r=" + std::to_string(r) +
                           " order=" + std::to_string(order);
              break;
            }
            if (threw) ++divergent_seen;
          }
          std::vector<RationalPoly> next;
          for (const auto& d : level)
            for (HatAxis ax : {HatAxis::Xi, HatAxis::Eta, HatAxis::Zeta})
              next.push_back(d.derivative_hat(ax));
          level = std::move(next);
        }
      }
    }
  if (res.pass && divergent_seen == 0) {
    res.pass = false;
    res.detail = "no divergent case exercised";
  }
  if (res.pass)
    res.detail = std::to_string(divergent_seen) + " divergent cases flagged";
  return res;
}

CheckResult check_quadrature_insensitivity() {
  CheckResult res;
  res.name = "quadrature_insensitivity";
  CoefficientTensor A = CoefficientTensor::identity(1);
  auto f = [](const Vec3&) { return 1.0; };
  double worst = 0.0;
  for (int k : {1, 2}) {
    PyramidMesh mesh = build_cube_mesh(2);
    GlobalSystem g1 = assemble_poisson(mesh, k, A, f, k);
    GlobalSystem g2 = assemble_poisson(mesh, k, A, f, k + 3);
    Eigen::SparseMatrix<double> diff = g1.A - g2.A;
    double scale = 1.0;
    for (int c = 0; c < g1.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(g1.A, c); it; ++it)
        scale = std::max(scale, std::abs(it.value()));
    for (int c = 0; c < diff.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it)
        worst = std::max(worst, std::abs(it.value()) / scale);
  }
  res.worst = worst;
  res.pass = worst <= 1e-12;
  return res;
}

std::vector<CheckResult> run_verification(int k_max, unsigned seed) {
  std::vector<CheckResult> out;
  out.push_back(check_quadrature_exactness());
  for (auto& r : check_gram_oracle(seed)) out.push_back(std::move(r));
  for (auto& r : check_structure(k_max)) out.push_back(std::move(r));
  out.push_back(check_divergence_counterexample());
  out.push_back(check_integrability_ladder(std::min(k_max, 4)));
  out.push_back(check_quadrature_insensitivity());
  return out;
}

}  // namespace pyrafem
