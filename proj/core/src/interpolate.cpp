#include "pyrafem/interpolate.hpp"

#include <mutex>

#include "pyrafem/errors.hpp"

namespace pyrafem {

namespace {

// ---- exact 2D polynomials in face parameters (s, t) ----

struct Poly2 {
  std::map<std::pair<int, int>, Rational> terms;

  void add(int i, int j, const Rational& c) {
    if (c == 0) return;
    auto key = std::make_pair(i, j);
    auto it = terms.find(key);
    if (it == terms.end()) {
      terms.emplace(key, c);
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }
  Poly2 ds() const {
    Poly2 p;
    for (const auto& [m, c] : terms)
      if (m.first) p.add(m.first - 1, m.second, c * m.first);
    return p;
  }
  Poly2 dt() const {
    Poly2 p;
    for (const auto& [m, c] : terms)
      if (m.second) p.add(m.first, m.second - 1, c * m.second);
    return p;
  }
  double eval(double s, double t) const {
    double total = 0.0;
    for (const auto& [m, c] : terms)
      total += to_double(c) * std::pow(s, m.first) * std::pow(t, m.second);
    return total;
  }
  // coefficients of the restriction to t = 1 - s, dense in powers of s
  std::vector<Rational> on_hypotenuse(int maxdeg) const {
    std::vector<Rational> out(maxdeg + 1, Rational(0));
    for (const auto& [m, c] : terms)
      for (int mm = 0; mm <= m.second; ++mm) {
        Rational b = binomial(m.second, mm) * c;
        if (mm % 2 != 0) b = -b;
        out[m.first + mm] += b;
      }
    return out;
  }
};

Poly2 poly2_monomial(int i, int j, const Rational& c = Rational(1)) {
  Poly2 p;
  p.add(i, j, c);
  return p;
}

Poly2 poly2_mul(const Poly2& a, const Poly2& b) {
  Poly2 p;
  for (const auto& [m1, c1] : a.terms)
    for (const auto& [m2, c2] : b.terms)
      p.add(m1.first + m2.first, m1.second + m2.second, c1 * c2);
  return p;
}

// scalar bubbles (trace space intersected with H^1_0 of the face)
std::vector<Poly2> scalar_face_bubbles(Face f, int k) {
  std::vector<Poly2> out;
  if (f == Face::Base) {
    // s(1-s)t(1-t) * s^i t^j, i,j <= k-2
    Poly2 b;
    b.add(1, 1, 1);
    b.add(2, 1, -1);
    b.add(1, 2, -1);
    b.add(2, 2, 1);
    for (int i = 0; i <= k - 2; ++i)
      for (int j = 0; j <= k - 2; ++j)
        out.push_back(poly2_mul(b, poly2_monomial(i, j)));
  } else {
    // s*t*(1-s-t) * s^i t^j, i+j <= k-3
    Poly2 b;
    b.add(1, 1, 1);
    b.add(2, 1, -1);
    b.add(1, 2, -1);
    for (int i = 0; i + 0 <= k - 3; ++i)
      for (int j = 0; i + j <= k - 3; ++j)
        out.push_back(poly2_mul(b, poly2_monomial(i, j)));
  }
  return out;
}

std::vector<Poly2> face_moment_space(Face f, int deg) {
  std::vector<Poly2> out;
  if (deg < 0) return out;
  if (f == Face::Base) {
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; j <= deg; ++j) out.push_back(poly2_monomial(i, j));
  } else {
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j) out.push_back(poly2_monomial(i, j));
  }
  return out;
}

using VecPoly2 = std::pair<Poly2, Poly2>;

// first-kind edge-element bubbles of order k on the parameter triangle:
// fields in R_k = (P_{k-1})^2 + span{(-t h, s h), h homogeneous deg k-1}
// with zero tangential trace on all three edges; exact nullspace.
std::vector<VecPoly2> nedelec_tri_bubbles(int k) {
  std::vector<VecPoly2> cand;
  for (int i = 0; i <= k - 1; ++i)
    for (int j = 0; i + j <= k - 1; ++j) {
      cand.push_back({poly2_monomial(i, j), Poly2{}});
      cand.push_back({Poly2{}, poly2_monomial(i, j)});
    }
  for (int i = 0; i <= k - 1; ++i) {
    VecPoly2 spin;
    spin.first = poly2_monomial(i, k - i, Rational(-1));   // -t * s^i t^{k-1-i}
    spin.second = poly2_monomial(i + 1, k - 1 - i);        //  s * s^i t^{k-1-i}
    cand.push_back(std::move(spin));
  }

  // conditions: q_s(s,0)=0; q_t(0,t)=0; (q_t-q_s)(s,1-s)=0
  const std::size_t nc = cand.size();
  RatMatrix m(3 * (k + 1), nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (const auto& [mm, co] : cand[c].first.terms)
      if (mm.second == 0) m(mm.first, c) += co;
    for (const auto& [mm, co] : cand[c].second.terms)
      if (mm.first == 0) m(k + 1 + mm.second, c) += co;
    Poly2 diff = cand[c].second;
    for (const auto& [mm, co] : cand[c].first.terms)
      diff.add(mm.first, mm.second, -co);
    auto hyp = diff.on_hypotenuse(k);
    for (int d = 0; d <= k; ++d) m(2 * (k + 1) + d, c) += hyp[d];
  }

  std::vector<VecPoly2> out;
  for (const auto& v : m.nullspace()) {
    VecPoly2 b;
    for (std::size_t c = 0; c < nc; ++c) {
      if (v[c] == 0) continue;
      for (const auto& [mm, co] : cand[c].first.terms)
        b.first.add(mm.first, mm.second, co * v[c]);
      for (const auto& [mm, co] : cand[c].second.terms)
        b.second.add(mm.first, mm.second, co * v[c]);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<VecPoly2> nedelec_quad_bubbles(int k) {
  std::vector<VecPoly2> out;
  Poly2 tb;  // t(1-t)
  tb.add(0, 1, 1);
  tb.add(0, 2, -1);
  Poly2 sb;  // s(1-s)
  sb.add(1, 0, 1);
  sb.add(2, 0, -1);
  for (int i = 0; i <= k - 1; ++i)
    for (int j = 0; j <= k - 2; ++j)
      out.push_back({poly2_mul(tb, poly2_monomial(i, j)), Poly2{}});
  for (int i = 0; i <= k - 2; ++i)
    for (int j = 0; j <= k - 1; ++j)
      out.push_back({Poly2{}, poly2_mul(sb, poly2_monomial(i, j))});
  return out;
}

// ---- quadrature on edges and faces ----

struct Rule2D {
  std::vector<std::array<double, 2>> pts;
  std::vector<double> w;
};

Rule2D face_rule(Face f, int n) {
  Rule2D r;
  if (f == Face::Base) {
    Rule1D leg = gauss_legendre(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.pts.push_back({leg.nodes[i], leg.nodes[j]});
        r.w.push_back(leg.weights[i] * leg.weights[j]);
      }
  } else {
    // {0 <= t <= 1, 0 <= s <= 1-t}: Jacobi(1,0) absorbs the (1-t) factor
    Rule1D leg = gauss_legendre(n);
    Rule1D jac = gauss_jacobi(n, 1);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) {
        r.pts.push_back({leg.nodes[i] * (1.0 - jac.nodes[l]), jac.nodes[l]});
        r.w.push_back(leg.weights[i] * jac.weights[l]);
      }
  }
  return r;
}

// directional derivative of the reference realization
RationalPoly dir_deriv_hat(const RationalPoly& p, int dx, int dy, int dz) {
  RationalPoly out;
  if (dx) out += p.derivative_hat(HatAxis::Xi).scaled(Rational(dx));
  if (dy) out += p.derivative_hat(HatAxis::Eta).scaled(Rational(dy));
  if (dz) out += p.derivative_hat(HatAxis::Zeta).scaled(Rational(dz));
  return out;
}

struct EdgeDef {
  Vec3 p0;
  std::array<int, 3> dir;  // p1 - p0, integer components
};

std::array<EdgeDef, 8> edge_defs() {
  return {{{Vec3(0, 0, 0), {1, 0, 0}},
           {Vec3(1, 0, 0), {0, 1, 0}},
           {Vec3(1, 1, 0), {-1, 0, 0}},
           {Vec3(0, 1, 0), {0, -1, 0}},
           {Vec3(0, 0, 0), {0, 0, 1}},
           {Vec3(1, 0, 0), {-1, 0, 1}},
           {Vec3(1, 1, 0), {-1, -1, 1}},
           {Vec3(0, 1, 0), {0, -1, 1}}}};
}

// dense 1D polynomial helpers (coefficients in t)
double eval1(const std::vector<Rational>& c, double t) {
  double total = 0.0, p = 1.0;
  for (const auto& x : c) {
    total += to_double(x) * p;
    p *= t;
  }
  return total;
}

std::vector<Rational> deriv1(const std::vector<Rational>& c) {
  std::vector<Rational> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * Rational(i));
  return d;
}

// edge bubble q_i = t(1-t) t^i as dense coefficients
std::vector<Rational> edge_bubble(int i) {
  std::vector<Rational> c(i + 3, Rational(0));
  c[i + 1] = 1;
  c[i + 2] = -1;
  return c;
}

Eigen::Vector2d face_param_pair(const Eigen::Vector3d& hat3, Face f) {
  auto [t1, t2] = face_tangents(f);
  return {hat3.dot(t1), hat3.dot(t2)};
}

}  // namespace

const std::vector<std::vector<RationalPoly>>& conforming_hats(int s, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>,
                  std::unique_ptr<std::vector<std::vector<RationalPoly>>>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(s, k);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
  auto built = std::make_unique<std::vector<std::vector<RationalPoly>>>();
  for (const auto& u : conf.basis) built->push_back(pullback_components(u));
  return *cache.emplace(key, std::move(built)).first->second;
}

const std::vector<std::vector<RationalPoly>>& conforming_dhats(int s, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>,
                  std::unique_ptr<std::vector<std::vector<RationalPoly>>>>
      cache;
  if (s > 2) throw DegreeError("no exterior derivative for 3-forms");
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(s, k);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
  auto built = std::make_unique<std::vector<std::vector<RationalPoly>>>();
  for (const auto& u : conf.basis)
    built->push_back(pullback_components(exterior_derivative(u)));
  return *cache.emplace(key, std::move(built)).first->second;
}

const std::vector<FormPoly>& interior_bubbles(int s, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<std::vector<FormPoly>>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(s, k);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
  auto built = std::make_unique<std::vector<FormPoly>>();
  if (s == 3) {
    *built = conf.basis;  // every L2 degree of freedom is interior
  } else {
    std::map<std::tuple<int, int, int, int>, std::size_t> row_of;
    std::vector<std::vector<std::pair<std::size_t, Rational>>> cols(conf.dim());
    for (std::size_t i = 0; i < conf.dim(); ++i) {
      auto hat = pullback_components(conf.basis[i]);
      for (int fi = 0; fi < 5; ++fi) {
        auto tr = face_trace(s, hat, kAllFaces[fi]);
        for (std::size_t slot = 0; slot < tr.size(); ++slot)
          for (const auto& [kk, c] : tr[slot]) {
            auto [ins, fresh] = row_of.emplace(
                std::make_tuple(fi, static_cast<int>(slot), kk.first,
                                kk.second),
                row_of.size());
            (void)fresh;
            cols[i].push_back({ins->second, c});
          }
      }
    }
    RatMatrix m(row_of.size(), conf.dim());
    for (std::size_t i = 0; i < conf.dim(); ++i)
      for (const auto& [r, c] : cols[i]) m(r, i) = c;
    for (const auto& v : m.nullspace()) {
      FormPoly u = FormPoly::zero(s);
      for (std::size_t i = 0; i < conf.dim(); ++i)
        if (v[i] != 0) u = u + conf.basis[i].scaled(v[i]);
      built->push_back(std::move(u));
    }
  }
  return *cache.emplace(key, std::move(built)).first->second;
}

Interpolant interpolate_form(const FormField& u, int k, const AffinePyramid& K) {
  const int s = u.s;
  if (s < 0 || s > 3) throw InvalidOrder("form degree must be 0..3");
  if (k < 1) throw InvalidOrder("interpolation order must be >= 1");

  const SpaceBasis& conf = space_basis(s, k, Family::Conforming);
  const auto& hats = conforming_hats(s, k);
  const std::size_t n = conf.dim();

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  auto new_row = [&]() -> Eigen::RowVectorXd& {
    rows.emplace_back(Eigen::RowVectorXd::Zero(n));
    rhs.push_back(0.0);
    return rows.back();
  };

  const Eigen::Matrix3d J = K.jacobian();
  const double dj = std::abs(K.det());
  const Eigen::MatrixXd W1 = push_weight(K, 1);
  const Eigen::MatrixXd W2 = push_weight(K, 2);
  const double invdet = 1.0 / K.det();

  const int n1 = k + 4;
  const Rule1D leg = gauss_legendre(n1);
  const PyramidRule vol = conical_rule(k + 4);

  auto volume_row = [&](const std::vector<Eigen::VectorXd>& test_vals,
                        const std::function<Eigen::VectorXd(
                            const std::vector<RationalPoly>&, const Vec3&)>&
                            basis_eval,
                        const std::vector<std::vector<RationalPoly>>& basis_sym,
                        const std::function<Eigen::VectorXd(const Vec3&)>&
                            field_eval) {
    Eigen::RowVectorXd& row = new_row();
    std::vector<double> racc(vol.points.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> acc(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        acc[q] = vol.weights[q] *
                 basis_eval(basis_sym[i], vol.points[q]).dot(test_vals[q]);
      row(i) = dj * pairwise_sum(std::move(acc));
    }
    for (std::size_t q = 0; q < vol.points.size(); ++q)
      racc[q] = vol.weights[q] *
                field_eval(K.map(vol.points[q])).dot(test_vals[q]);
    rhs.back() = dj * pairwise_sum(std::move(racc));
  };

  if (s == 0) {
    // vertex values; the apex value of a conforming function is the
    // coefficient of the constant canonical monomial
    for (int v = 0; v < 4; ++v) {
      Eigen::RowVectorXd& row = new_row();
      Vec3 p = AffinePyramid::reference().vertex(v);
      for (std::size_t i = 0; i < n; ++i)
        row(i) = conf.basis[i].comp[0].evaluate_reference(p[0], p[1], p[2]);
      rhs.back() = u.value(K.map(p))(0);
    }
    {
      Eigen::RowVectorXd& row = new_row();
      for (std::size_t i = 0; i < n; ++i) {
        auto it = conf.basis[i].comp[0].terms().find(Monomial{0, 0, 0});
        row(i) = it == conf.basis[i].comp[0].terms().end() ? 0.0
                                                           : to_double(it->second);
      }
      rhs.back() = u.value(K.map(Vec3(0, 0, 1)))(0);
    }

    // edge H^1-seminorm projections against edge bubbles
    for (const auto& e : edge_defs()) {
      if (k < 2) break;
      std::vector<RationalPoly> dv(n);
      for (std::size_t i = 0; i < n; ++i)
        dv[i] = dir_deriv_hat(conf.basis[i].comp[0], e.dir[0], e.dir[1],
                              e.dir[2]);
      Vec3 d(e.dir[0], e.dir[1], e.dir[2]);
      for (int ib = 0; ib <= k - 2; ++ib) {
        auto q = edge_bubble(ib);
        auto qp = deriv1(q);
        auto qpp = deriv1(qp);
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (int g = 0; g < n1; ++g) {
          double t = leg.nodes[g], w = leg.weights[g];
          Vec3 p = e.p0 + t * d;
          double qpv = eval1(qp, t);
          for (std::size_t i = 0; i < n; ++i)
            row(i) += w * dv[i].evaluate_reference(p[0], p[1], p[2]) * qpv;
          r -= w * u.value(K.map(p))(0) * eval1(qpp, t);
        }
        r += u.value(K.map(e.p0 + d))(0) * eval1(qp, 1.0);
        r -= u.value(K.map(e.p0))(0) * eval1(qp, 0.0);
        rhs.back() = r;
      }
    }

    // face H^1-seminorm projections in the physical first fundamental form
    for (Face f : kAllFaces) {
      auto bubbles = scalar_face_bubbles(f, k);
      if (bubbles.empty()) continue;
      auto [t1, t2] = face_tangents(f);
      Eigen::Vector3d T1 = J * t1, T2 = J * t2;
      Eigen::Matrix2d G;
      G << T1.dot(T1), T1.dot(T2), T2.dot(T1), T2.dot(T2);
      Eigen::Matrix2d Gi = G.inverse();
      double sg = std::sqrt(G.determinant());
      Rule2D fr = face_rule(f, n1);
      const auto& dh = conforming_dhats(0, k);
      for (const auto& b : bubbles) {
        Poly2 bs = b.ds(), bt = b.dt();
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (std::size_t g = 0; g < fr.pts.size(); ++g) {
          double sp = fr.pts[g][0], tp = fr.pts[g][1], w = fr.w[g];
          Vec3 p = face_point(f, sp, tp);
          Eigen::Vector2d gq(bs.eval(sp, tp), bt.eval(sp, tp));
          Eigen::Vector2d Gigq = Gi * gq * sg;
          for (std::size_t i = 0; i < n; ++i) {
            Eigen::Vector2d gv = face_param_pair(eval_hat(dh[i], p), f);
            row(i) += w * gv.dot(Gigq);
          }
          Eigen::Vector3d gu = u.dvalue(K.map(p));
          Eigen::Vector2d gup(T1.dot(gu), T2.dot(gu));
          r += w * gup.dot(Gigq);
        }
        rhs.back() = r;
      }
    }

    // interior H^1-seminorm projection against interior bubbles
    const auto& ib = interior_bubbles(0, k);
    if (!ib.empty()) {
      const auto& dh = conforming_dhats(0, k);
      std::vector<std::vector<RationalPoly>> bub_dhats;
      for (const auto& b : ib)
        bub_dhats.push_back(pullback_components(exterior_derivative(b)));
      for (const auto& bd : bub_dhats) {
        std::vector<Eigen::VectorXd> test(vol.points.size());
        for (std::size_t q = 0; q < vol.points.size(); ++q)
          test[q] = W1 * eval_hat(bd, vol.points[q]);
        volume_row(
            test,
            [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
              return Eigen::VectorXd(W1 * eval_hat(sym, p));
            },
            dh, [&](const Vec3& x) { return Eigen::VectorXd(u.dvalue(x)); });
      }
    }
  } else if (s == 1) {
    // edge tangential moments against P_{k-1}
    for (const auto& e : edge_defs()) {
      Vec3 d(e.dir[0], e.dir[1], e.dir[2]);
      Eigen::Vector3d Jd = J * d;
      for (int m = 0; m <= k - 1; ++m) {
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (int g = 0; g < n1; ++g) {
          double t = leg.nodes[g], w = leg.weights[g];
          double tm = std::pow(t, m);
          Vec3 p = e.p0 + t * d;
          for (std::size_t i = 0; i < n; ++i)
            row(i) += w * eval_hat(hats[i], p).dot(d) * tm;
          r += w * u.value(K.map(p)).dot(Jd) * tm;
        }
        rhs.back() = r;
      }
    }

    const auto& dh = conforming_dhats(1, k);
    for (Face f : kAllFaces) {
      auto bubbles =
          f == Face::Base ? nedelec_quad_bubbles(k) : nedelec_tri_bubbles(k);
      auto grads = scalar_face_bubbles(f, k);
      if (bubbles.empty() && grads.empty()) continue;
      auto [t1, t2] = face_tangents(f);
      Eigen::Vector3d T1 = J * t1, T2 = J * t2;
      Eigen::Matrix2d G;
      G << T1.dot(T1), T1.dot(T2), T2.dot(T1), T2.dot(T2);
      Eigen::Matrix2d Gi = G.inverse();
      double sg = std::sqrt(G.determinant());
      Eigen::Vector3d nrm_hat = t1.cross(t2);
      Eigen::Vector3d nrm_phys = T1.cross(T2);
      Rule2D fr = face_rule(f, n1);

      // curl minimization rows
      for (const auto& b : bubbles) {
        Poly2 cq = b.second.ds();  // curl_param q = ds q_t - dt q_s
        for (const auto& [m, c] : b.first.dt().terms) cq.add(m.first, m.second, -c);
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (std::size_t g = 0; g < fr.pts.size(); ++g) {
          double sp = fr.pts[g][0], tp = fr.pts[g][1], w = fr.w[g];
          Vec3 p = face_point(f, sp, tp);
          double cqv = cq.eval(sp, tp) / sg;
          for (std::size_t i = 0; i < n; ++i)
            row(i) += w * eval_hat(dh[i], p).dot(nrm_hat) * cqv;
          r += w * u.dvalue(K.map(p)).dot(nrm_phys) * cqv;
        }
        rhs.back() = r;
      }

      // gradient-constraint rows
      for (const auto& b : grads) {
        Poly2 bs = b.ds(), bt = b.dt();
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (std::size_t g = 0; g < fr.pts.size(); ++g) {
          double sp = fr.pts[g][0], tp = fr.pts[g][1], w = fr.w[g];
          Vec3 p = face_point(f, sp, tp);
          Eigen::Vector2d gq(bs.eval(sp, tp), bt.eval(sp, tp));
          Eigen::Vector2d Gigq = Gi * gq * sg;
          for (std::size_t i = 0; i < n; ++i)
            row(i) += w * face_param_pair(eval_hat(hats[i], p), f).dot(Gigq);
          Eigen::Vector3d uv = u.value(K.map(p));
          Eigen::Vector2d up(T1.dot(uv), T2.dot(uv));
          r += w * up.dot(Gigq);
        }
        rhs.back() = r;
      }
    }

    // interior: curl minimization + gradient constraints
    for (const auto& b : interior_bubbles(1, k)) {
      auto bd = pullback_components(exterior_derivative(b));
      std::vector<Eigen::VectorXd> test(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        test[q] = W2 * eval_hat(bd, vol.points[q]);
      volume_row(
          test,
          [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
            return Eigen::VectorXd(W2 * eval_hat(sym, p));
          },
          dh, [&](const Vec3& x) { return Eigen::VectorXd(u.dvalue(x)); });
    }
    for (const auto& b : interior_bubbles(0, k)) {
      auto bd = pullback_components(exterior_derivative(b));
      std::vector<Eigen::VectorXd> test(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        test[q] = W1 * eval_hat(bd, vol.points[q]);
      volume_row(
          test,
          [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
            return Eigen::VectorXd(W1 * eval_hat(sym, p));
          },
          hats, [&](const Vec3& x) { return Eigen::VectorXd(u.value(x)); });
    }
  } else if (s == 2) {
    // face normal moments
    for (Face f : kAllFaces) {
      auto moments = face_moment_space(f, k - 1);
      auto [t1, t2] = face_tangents(f);
      Eigen::Vector3d nrm_hat = t1.cross(t2);
      Eigen::Vector3d nrm_phys = (J * t1).cross(J * t2);
      Rule2D fr = face_rule(f, n1);
      for (const auto& q : moments) {
        Eigen::RowVectorXd& row = new_row();
        double r = 0.0;
        for (std::size_t g = 0; g < fr.pts.size(); ++g) {
          double sp = fr.pts[g][0], tp = fr.pts[g][1], w = fr.w[g];
          Vec3 p = face_point(f, sp, tp);
          double qv = q.eval(sp, tp);
          for (std::size_t i = 0; i < n; ++i)
            row(i) += w * eval_hat(hats[i], p).dot(nrm_hat) * qv;
          r += w * u.value(K.map(p)).dot(nrm_phys) * qv;
        }
        rhs.back() = r;
      }
    }

    // interior: divergence minimization + curl constraints
    const auto& dh = conforming_dhats(2, k);
    for (const auto& b : interior_bubbles(2, k)) {
      auto bd = pullback_components(exterior_derivative(b));
      std::vector<Eigen::VectorXd> test(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        test[q] = invdet * eval_hat(bd, vol.points[q]);
      volume_row(
          test,
          [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
            return Eigen::VectorXd(invdet * eval_hat(sym, p));
          },
          dh, [&](const Vec3& x) { return Eigen::VectorXd(u.dvalue(x)); });
    }
    for (const auto& b : interior_bubbles(1, k)) {
      auto bd = pullback_components(exterior_derivative(b));
      std::vector<Eigen::VectorXd> test(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        test[q] = W2 * eval_hat(bd, vol.points[q]);
      volume_row(
          test,
          [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
            return Eigen::VectorXd(W2 * eval_hat(sym, p));
          },
          hats, [&](const Vec3& x) { return Eigen::VectorXd(u.value(x)); });
    }
  } else {
    // L2 projection onto the full basis
    for (const auto& b : conf.basis) {
      auto bh = pullback_components(b);
      std::vector<Eigen::VectorXd> test(vol.points.size());
      for (std::size_t q = 0; q < vol.points.size(); ++q)
        test[q] = invdet * eval_hat(bh, vol.points[q]);
      volume_row(
          test,
          [&](const std::vector<RationalPoly>& sym, const Vec3& p) {
            return Eigen::VectorXd(invdet * eval_hat(sym, p));
          },
          hats, [&](const Vec3& x) { return Eigen::VectorXd(u.value(x)); });
    }
  }

  Eigen::MatrixXd M(rows.size(), n);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    M.row(r) = rows[r];
    b(r) = rhs[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (static_cast<std::size_t>(qr.rank()) < n)
    throw SingularSystem("interpolation conditions are rank-deficient (" +
                         std::to_string(qr.rank()) + " < " +
                         std::to_string(n) + ")");
  Interpolant out;
  out.s = s;
  out.k = k;
  out.coeffs = qr.solve(b);
  return out;
}

Eigen::VectorXd interpolate(const FormField& u, int k, const AffinePyramid& K) {
  return interpolate_form(u, k, K).coeffs;
}

Eigen::VectorXd interpolant_hat(const Interpolant& v, const Vec3& ref) {
  const auto& hats = conforming_hats(v.s, v.k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(proxy_count(v.s));
  for (std::size_t i = 0; i < hats.size(); ++i)
    out += v.coeffs(i) * eval_hat(hats[i], ref);
  return out;
}

Eigen::VectorXd interpolant_dhat(const Interpolant& v, const Vec3& ref) {
  const auto& dhats = conforming_dhats(v.s, v.k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(proxy_count(v.s + 1));
  for (std::size_t i = 0; i < dhats.size(); ++i)
    out += v.coeffs(i) * eval_hat(dhats[i], ref);
  return out;
}

}  // namespace pyrafem
