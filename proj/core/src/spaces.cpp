#include "pyrafem/spaces.hpp"

#include <mutex>
#include <tuple>

#include "pyrafem/errors.hpp"

namespace pyrafem {

namespace {

// Canonical-monomial basis of Q_k^{l,m,n}: the triangular change of basis
// z^c/(1+z)^k -> (1+z)^-c' is invertible, so {x^a y^b (1+z)^-c',
// a<=l, b<=m, k-n<=c'<=k} spans the same space.
std::vector<Monomial> tensor_monomials(int l, int m, int n, int k) {
  std::vector<Monomial> out;
  if (l < 0 || m < 0 || n < 0) return out;
  for (int c = k - n; c <= k; ++c)
    for (int a = 0; a <= l; ++a)
      for (int b = 0; b <= m; ++b) out.push_back({a, b, c});
  return out;
}

std::vector<Monomial> bracket_monomials(int l, int m, int k) {
  std::vector<Monomial> out;
  for (int c = 0; c <= k; ++c) {
    int amax = c + l - k, bmax = c + m - k;
    if (amax < 0 || bmax < 0) continue;
    for (int a = 0; a <= amax; ++a)
      for (int b = 0; b <= bmax; ++b) out.push_back({a, b, c});
  }
  return out;
}

FormPoly component_form(int s, int slot, const RationalPoly& p) {
  FormPoly u = FormPoly::zero(s);
  u.comp[slot] = p;
  return u;
}

void check_order(int k) {
  if (k < 1) throw InvalidOrder("space order must be >= 1");
}

// Verifies linear independence and reports the basis unchanged.
void assert_independent(const std::vector<FormPoly>& basis, int s) {
  if (basis.empty()) return;
  MonomialIndex idx(s);
  for (const auto& u : basis) idx.absorb(u);
  SpanBuilder span(idx.size());
  for (const auto& u : basis)
    if (!span.accept(idx.flatten(u)))
      throw Error("space basis construction produced a dependent vector");
}

}  // namespace

SpaceBasis build_underlying_basis(int s, int k) {
  check_order(k);
  SpaceBasis out;
  out.s = s;
  out.k = k;
  out.family = Family::Underlying;

  switch (s) {
    case 0: {
      for (const auto& m : tensor_monomials(k, k, k - 1, k))
        out.basis.push_back(FormPoly(0, {RationalPoly::monomial(m)}));
      out.basis.push_back(FormPoly(0, {RationalPoly::z_numerator(0, 0, k, k)}));
      break;
    }
    case 1: {
      const std::array<std::array<int, 3>, 3> lmn = {
          {{k - 1, k, k - 1}, {k, k - 1, k - 1}, {k, k, k - 2}}};
      for (int slot = 0; slot < 3; ++slot)
        for (const auto& m :
             tensor_monomials(lmn[slot][0], lmn[slot][1], lmn[slot][2], k + 1))
          out.basis.push_back(component_form(1, slot, RationalPoly::monomial(m)));
      // z^{k-1}/(1+z)^{k+1} (r_x z, r_y z, -r) for r = x^i y^j
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) {
          FormPoly u = FormPoly::zero(1);
          if (i > 0)
            u.comp[0] = RationalPoly::z_numerator(i - 1, j, k, k + 1, i);
          if (j > 0)
            u.comp[1] = RationalPoly::z_numerator(i, j - 1, k, k + 1, j);
          u.comp[2] = -RationalPoly::z_numerator(i, j, k - 1, k + 1);
          out.basis.push_back(std::move(u));
        }
      break;
    }
    case 2: {
      const std::array<std::array<int, 3>, 3> lmn = {
          {{k, k - 1, k - 2}, {k - 1, k, k - 2}, {k - 1, k - 1, k - 1}}};
      for (int slot = 0; slot < 3; ++slot)
        for (const auto& m :
             tensor_monomials(lmn[slot][0], lmn[slot][1], lmn[slot][2], k + 2))
          out.basis.push_back(component_form(2, slot, RationalPoly::monomial(m)));
      // z^{k-1}/(1+z)^{k+2} (0, 2s, s_y(1+z)) for s = x^i y^j in Q^{k-1,k}
      for (int i = 0; i <= k - 1; ++i)
        for (int j = 0; j <= k; ++j) {
          FormPoly u = FormPoly::zero(2);
          u.comp[1] = RationalPoly::z_numerator(i, j, k - 1, k + 2, 2);
          if (j > 0)
            u.comp[2] = RationalPoly::z_numerator(i, j - 1, k - 1, k + 1, j);
          out.basis.push_back(std::move(u));
        }
      // z^{k-1}/(1+z)^{k+2} (2t, 0, t_x(1+z)) for t = x^i y^j in Q^{k,k-1}
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k - 1; ++j) {
          FormPoly u = FormPoly::zero(2);
          u.comp[0] = RationalPoly::z_numerator(i, j, k - 1, k + 2, 2);
          if (i > 0)
            u.comp[2] = RationalPoly::z_numerator(i - 1, j, k - 1, k + 1, i);
          out.basis.push_back(std::move(u));
        }
      break;
    }
    case 3: {
      for (const auto& m : tensor_monomials(k - 1, k - 1, k - 1, k + 3))
        out.basis.push_back(FormPoly(3, {RationalPoly::monomial(m)}));
      break;
    }
    default:
      throw InvalidOrder("form degree must be 0..3");
  }

  assert_independent(out.basis, s);
  return out;
}

SpaceBasis build_reduced_basis(int s, int k) {
  check_order(k);
  SpaceBasis out;
  out.s = s;
  out.k = k;
  out.family = Family::Reduced;

  auto first_block_s1 = [&]() {
    std::vector<FormPoly> block;
    for (const auto& m : bracket_monomials(k - 1, k, k + 1))
      block.push_back(component_form(1, 0, RationalPoly::monomial(m)));
    for (const auto& m : bracket_monomials(k, k - 1, k + 1))
      block.push_back(component_form(1, 1, RationalPoly::monomial(m)));
    return block;
  };

  switch (s) {
    case 0: {
      for (const auto& m : bracket_monomials(k, k, k))
        out.basis.push_back(FormPoly(0, {RationalPoly::monomial(m)}));
      assert_independent(out.basis, s);
      return out;
    }
    case 1: {
      std::vector<FormPoly> candidates = first_block_s1();
      for (const auto& m : bracket_monomials(k, k, k))
        candidates.push_back(
            exterior_derivative(FormPoly(0, {RationalPoly::monomial(m)})));
      MonomialIndex idx(1);
      for (const auto& u : candidates) idx.absorb(u);
      SpanBuilder span(idx.size());
      for (const auto& u : candidates)
        if (!u.is_zero() && span.accept(idx.flatten(u)))
          out.basis.push_back(u);
      return out;
    }
    case 2: {
      std::vector<FormPoly> candidates;
      for (const auto& m : bracket_monomials(k - 1, k - 1, k + 2))
        candidates.push_back(component_form(2, 2, RationalPoly::monomial(m)));
      for (const auto& u : first_block_s1())
        candidates.push_back(exterior_derivative(u));
      MonomialIndex idx(2);
      for (const auto& u : candidates) idx.absorb(u);
      SpanBuilder span(idx.size());
      for (const auto& u : candidates)
        if (!u.is_zero() && span.accept(idx.flatten(u)))
          out.basis.push_back(u);
      return out;
    }
    case 3: {
      for (const auto& m : bracket_monomials(k - 1, k - 1, k + 3))
        out.basis.push_back(FormPoly(3, {RationalPoly::monomial(m)}));
      assert_independent(out.basis, s);
      return out;
    }
    default:
      throw InvalidOrder("form degree must be 0..3");
  }
}

// ---- trace machinery ----

FaceKeys restrict_scalar(const RationalPoly& hat_composed, Face f) {
  FaceKeys keys;
  auto add = [&](std::pair<int, int> key, const Rational& c) {
    auto it = keys.find(key);
    if (it == keys.end()) {
      keys.emplace(key, c);
    } else {
      it->second += c;
      if (it->second == 0) keys.erase(it);
    }
  };
  for (const auto& [m, c] : hat_composed.terms()) {
    switch (f) {
      case Face::Base:
        add({m.a, m.b}, c);
        break;
      case Face::XiZero:
        if (m.a == 0) add({m.b, m.c - m.b}, c);
        break;
      case Face::EtaZero:
        if (m.b == 0) add({m.a, m.c - m.a}, c);
        break;
      case Face::XiSlant:
        add({m.b, m.c - m.b}, c);
        break;
      case Face::EtaSlant:
        add({m.a, m.c - m.a}, c);
        break;
    }
  }
  return keys;
}

namespace {

FaceKeys keys_sum(const FaceKeys& a, const FaceKeys& b, int sign) {
  FaceKeys out = a;
  for (const auto& [k, c] : b) {
    auto it = out.find(k);
    Rational add = sign < 0 ? Rational(-c) : c;
    if (it == out.end()) {
      out.emplace(k, add);
    } else {
      it->second += add;
      if (it->second == 0) out.erase(it);
    }
  }
  return out;
}

FaceKeys keys_negate(const FaceKeys& a) {
  FaceKeys out;
  for (const auto& [k, c] : a) out.emplace(k, -c);
  return out;
}

}  // namespace

std::vector<FaceKeys> face_trace(int s, const std::vector<RationalPoly>& hat,
                                 Face f) {
  switch (s) {
    case 0:
      return {restrict_scalar(hat[0], f)};
    case 1: {
      // tangential components (t1 . u_hat, t2 . u_hat)
      FaceKeys h0 = restrict_scalar(hat[0], f);
      FaceKeys h1 = restrict_scalar(hat[1], f);
      FaceKeys h2 = restrict_scalar(hat[2], f);
      switch (f) {
        case Face::Base:
          return {h0, h1};
        case Face::XiZero:
          return {h1, h2};
        case Face::EtaZero:
          return {h0, h2};
        case Face::XiSlant:
          return {h1, keys_sum(h2, h0, -1)};
        case Face::EtaSlant:
          return {h0, keys_sum(h2, h1, -1)};
      }
      break;
    }
    case 2: {
      // flux proxy dotted with t1 x t2
      switch (f) {
        case Face::Base:
          return {restrict_scalar(hat[2], f)};
        case Face::XiZero:
          return {restrict_scalar(hat[0], f)};
        case Face::EtaZero:
          return {keys_negate(restrict_scalar(hat[1], f))};
        case Face::XiSlant:
          return {keys_sum(restrict_scalar(hat[0], f),
                           restrict_scalar(hat[2], f), +1)};
        case Face::EtaSlant:
          return {keys_negate(keys_sum(restrict_scalar(hat[1], f),
                                       restrict_scalar(hat[2], f), +1))};
      }
      break;
    }
    case 3:
      return {};
  }
  throw InvalidOrder("face_trace: form degree must be 0..3");
}

Vec3 face_point(Face f, double sp, double tp) {
  switch (f) {
    case Face::Base:
      return {sp, tp, 0.0};
    case Face::XiZero:
      return {0.0, sp, tp};
    case Face::EtaZero:
      return {sp, 0.0, tp};
    case Face::XiSlant:
      return {1.0 - tp, sp, tp};
    case Face::EtaSlant:
      return {sp, 1.0 - tp, tp};
  }
  throw Error("face_point: bad face");
}

std::pair<Vec3, Vec3> face_tangents(Face f) {
  switch (f) {
    case Face::Base:
      return {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    case Face::XiZero:
      return {Vec3(0, 1, 0), Vec3(0, 0, 1)};
    case Face::EtaZero:
      return {Vec3(1, 0, 0), Vec3(0, 0, 1)};
    case Face::XiSlant:
      return {Vec3(0, 1, 0), Vec3(-1, 0, 1)};
    case Face::EtaSlant:
      return {Vec3(1, 0, 0), Vec3(0, -1, 1)};
  }
  throw Error("face_tangents: bad face");
}

SpaceBasis build_conforming_basis(int s, int k) {
  check_order(k);
  const SpaceBasis& under = space_basis(s, k, Family::Underlying);

  SpaceBasis out;
  out.s = s;
  out.k = k;
  out.family = Family::Conforming;

  if (s == 3) {
    out.basis = under.basis;  // no trace, no constraints
    return out;
  }

  // Constraint rows: one per offending trace key per (face, slot).
  // Polynomial trace degree limit: P_k for s=0,1 components; P_{k-1} for
  // the s=2 normal component.  s=1 additionally needs the degree-(k+1)
  // part of s*v_s + tau*v_tau to vanish (first-kind edge space on the
  // triangle); that product lives in slot 2.
  const int limit = (s == 2) ? k - 1 : k;
  std::map<std::tuple<int, int, int, int>, std::size_t> row_of;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> col_entries(
      under.dim());

  auto record = [&](std::size_t col, int face, int slot, int lim,
                    const FaceKeys& keys) {
    for (const auto& [key, c] : keys) {
      auto [p, e] = key;
      if (e >= 0 && p + e <= lim) continue;
      auto [it, inserted] =
          row_of.emplace(std::make_tuple(face, slot, p, e), row_of.size());
      (void)inserted;
      col_entries[col].push_back({it->second, c});
    }
  };

  for (std::size_t i = 0; i < under.dim(); ++i) {
    auto hat = pullback_components(under.basis[i]);
    for (int fi = 0; fi < 4; ++fi) {
      Face f = kTriangleFaces[fi];
      auto tr = face_trace(s, hat, f);
      for (std::size_t slot = 0; slot < tr.size(); ++slot)
        record(i, fi, static_cast<int>(slot), limit, tr[slot]);
      if (s == 1) {
        FaceKeys w;
        auto add = [&](std::pair<int, int> key, const Rational& c) {
          auto it = w.find(key);
          if (it == w.end()) {
            w.emplace(key, c);
          } else {
            it->second += c;
            if (it->second == 0) w.erase(it);
          }
        };
        for (const auto& [key, c] : tr[0]) add({key.first + 1, key.second}, c);
        for (const auto& [key, c] : tr[1]) {
          add({key.first, key.second}, c);
          add({key.first, key.second + 1}, -c);
        }
        record(i, fi, 2, k, w);
      }
    }
  }

  RatMatrix constraints(row_of.size(), under.dim());
  for (std::size_t i = 0; i < under.dim(); ++i)
    for (const auto& [row, c] : col_entries[i]) constraints(row, i) = c;

  for (const auto& coeffs : constraints.nullspace()) {
    FormPoly u = FormPoly::zero(s);
    for (std::size_t i = 0; i < under.dim(); ++i)
      if (coeffs[i] != 0) u = u + under.basis[i].scaled(coeffs[i]);
    out.basis.push_back(std::move(u));
  }
  return out;
}

const SpaceBasis& space_basis(int s, int k, Family family) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, Family>, std::unique_ptr<SpaceBasis>>
      cache;
  std::unique_lock<std::mutex> lock(mu);
  auto key = std::make_tuple(s, k, family);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  lock.unlock();

  auto built = std::make_unique<SpaceBasis>();
  switch (family) {
    case Family::Underlying:
      *built = build_underlying_basis(s, k);
      break;
    case Family::Reduced:
      *built = build_reduced_basis(s, k);
      break;
    case Family::Conforming:
      *built = build_conforming_basis(s, k);
      break;
  }

  lock.lock();
  auto [pos, inserted] = cache.emplace(key, std::move(built));
  (void)inserted;  // a racing builder may have won; either result is identical
  return *pos->second;
}

bool in_span(const std::vector<FormPoly>& basis, const FormPoly& u) {
  if (u.is_zero()) return true;
  if (basis.empty()) return false;
  MonomialIndex idx(u.s);
  for (const auto& b : basis) idx.absorb(b);
  idx.absorb(u);
  SpanBuilder span(idx.size());
  for (const auto& b : basis) span.accept(idx.flatten(b));
  return span.contains(idx.flatten(u));
}

std::vector<FormPoly> decompose_exact_weight(const FormPoly& u, int k) {
  check_order(k);
  const SpaceBasis& reduced = space_basis(u.s, k, Family::Reduced);
  if (!in_span(reduced.basis, u))
    throw NotInSpace("decompose_exact_weight: input not in the reduced space");

  auto hat = pullback_components(u);
  WeightMatrix winv = infinite_weight_inverse(u.s);
  std::vector<FormPoly> parts;
  parts.reserve(k + 1);
  for (int r = 0; r <= k; ++r) {
    std::vector<RationalPoly> group(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i) {
      group[i] = hat[i].weight_part(r);
      if (!group[i].member_of(SpaceSpec::exact_weight(r + 1, r + 1, r)))
        throw Error("decompose_exact_weight: group escapes Q_r^{r+1,r+1,0}");
    }
    parts.push_back(FormPoly(u.s, winv.apply(group)));
  }
  return parts;
}

std::vector<FormPoly> build_exact_weight_basis(int s, int k, int r) {
  check_order(k);
  if (r < 0 || r > k) throw InvalidOrder("exact weight index must be 0..k");
  const SpaceBasis& reduced = space_basis(s, k, Family::Reduced);

  std::vector<FormPoly> parts;
  for (const auto& u : reduced.basis)
    parts.push_back(decompose_exact_weight(u, k)[r]);

  MonomialIndex idx(s);
  for (const auto& u : parts) idx.absorb(u);
  SpanBuilder span(idx.size());
  std::vector<FormPoly> basis;
  for (auto& u : parts)
    if (!u.is_zero() && span.accept(idx.flatten(u))) basis.push_back(std::move(u));
  return basis;
}

FormPoly polynomial_embed(int s, int k, const std::vector<HatPoly>& p) {
  check_order(k);
  if (static_cast<int>(p.size()) != proxy_count(s))
    throw DimensionMismatch("polynomial_embed: wrong component count");
  const int max_deg = (s == 0) ? k : k - 1;
  for (const auto& comp : p)
    if (comp.total_degree() > max_deg)
      throw DegreeError("polynomial_embed: component degree exceeds " +
                        std::to_string(max_deg));

  std::vector<RationalPoly> composed(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    composed[i] = p[i].compose_projective();
  FormPoly u(s, infinite_weight_inverse(s).apply(composed));

  const SpaceBasis& reduced = space_basis(s, k, Family::Reduced);
  if (!in_span(reduced.basis, u))
    throw NotInSpace("polynomial_embed: embedded form escapes the space");
  return u;
}

ExactSequenceReport exact_sequence_report(int k) {
  check_order(k);
  ExactSequenceReport rep{};
  rep.k = k;

  std::array<const SpaceBasis*, 4> R;
  for (int s = 0; s < 4; ++s) {
    R[s] = &space_basis(s, k, Family::Reduced);
    rep.dim_reduced[s] = R[s]->dim();
  }

  for (int s = 0; s < 3; ++s) {
    MonomialIndex idx(s + 1);
    std::vector<FormPoly> images;
    for (const auto& u : R[s]->basis) images.push_back(exterior_derivative(u));
    for (const auto& v : R[s + 1]->basis) idx.absorb(v);
    for (const auto& v : images) idx.absorb(v);

    SpanBuilder target(idx.size());
    for (const auto& v : R[s + 1]->basis) target.accept(idx.flatten(v));

    SpanBuilder image_span(idx.size());
    bool contained = true;
    for (const auto& v : images) {
      if (!target.contains(idx.flatten(v))) contained = false;
      if (!v.is_zero()) image_span.accept(idx.flatten(v));
    }
    if (!contained)
      throw Error("exterior derivative leaves the reduced space chain");
    rep.rank_d[s] = image_span.rank();
    rep.kernel_dim[s] = R[s]->dim() - image_span.rank();
  }

  rep.grad_kernel_is_constants = rep.kernel_dim[0] == 1;
  rep.ker_curl_equals_im_grad = rep.kernel_dim[1] == rep.rank_d[0];
  rep.ker_div_equals_im_curl = rep.kernel_dim[2] == rep.rank_d[1];
  rep.div_surjective = rep.rank_d[2] == rep.dim_reduced[3];
  rep.euler_sum = static_cast<long>(rep.dim_reduced[0]) -
                  static_cast<long>(rep.dim_reduced[1]) +
                  static_cast<long>(rep.dim_reduced[2]) -
                  static_cast<long>(rep.dim_reduced[3]);
  return rep;
}

}  // namespace pyrafem
