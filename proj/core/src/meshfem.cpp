#include "pyrafem/meshfem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <thread>

#include "pyrafem/errors.hpp"

namespace pyrafem {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::array<Vec3, 5> kRefVerts = {Vec3(0, 0, 0), Vec3(1, 0, 0),
                                       Vec3(1, 1, 0), Vec3(0, 1, 0),
                                       Vec3(0, 0, 1)};

const std::array<std::array<int, 2>, 8> kLocalEdges = {
    {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}, {2, 4}, {3, 4}}};

// triangular faces with their local corners at params (0,0), (1,0), (0,1)
struct TriFaceDef {
  Face f;
  std::array<int, 3> corners;
};
const std::array<TriFaceDef, 4> kTriFaces = {{{Face::XiZero, {0, 3, 4}},
                                              {Face::EtaZero, {0, 1, 4}},
                                              {Face::XiSlant, {1, 2, 4}},
                                              {Face::EtaSlant, {3, 2, 4}}}};
// base face corners at params (0,0), (1,0), (1,1), (0,1)
const std::array<int, 4> kQuadCorners = {0, 1, 2, 3};

RatVec3 rat_midpoint(const RatVec3& a, const RatVec3& b) {
  return {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
}

bool on_cube_boundary(const RatVec3& p) {
  for (int i = 0; i < 3; ++i)
    if (p[i] == 0 || p[i] == 1) return true;
  return false;
}

// ---- small exact 2D polynomials (duplicated locally; face moments only) ----
struct P2 {
  std::map<std::pair<int, int>, Rational> t;
  void add(int i, int j, const Rational& c) {
    if (c == 0) return;
    auto key = std::make_pair(i, j);
    auto it = t.find(key);
    if (it == t.end()) {
      t.emplace(key, c);
    } else {
      it->second += c;
      if (it->second == 0) t.erase(it);
    }
  }
  double eval(double s, double tt) const {
    double total = 0.0;
    for (const auto& [m, c] : t)
      total += to_double(c) * std::pow(s, m.first) * std::pow(tt, m.second);
    return total;
  }
};

P2 p2_mul(const P2& a, const P2& b) {
  P2 p;
  for (const auto& [m1, c1] : a.t)
    for (const auto& [m2, c2] : b.t)
      p.add(m1.first + m2.first, m1.second + m2.second, c1 * c2);
  return p;
}

P2 p2_pow(P2 base, int e) {
  P2 r;
  r.add(0, 0, 1);
  for (int i = 0; i < e; ++i) r = p2_mul(r, base);
  return r;
}

struct Rule2D {
  std::vector<std::array<double, 2>> pts;
  std::vector<double> w;
};

Rule2D face_rule(Face f, int n) {
  Rule2D r;
  Rule1D leg = gauss_legendre(n);
  if (f == Face::Base) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.pts.push_back({leg.nodes[i], leg.nodes[j]});
        r.w.push_back(leg.weights[i] * leg.weights[j]);
      }
  } else {
    Rule1D jac = gauss_jacobi(n, 1);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) {
        r.pts.push_back({leg.nodes[i] * (1.0 - jac.nodes[l]), jac.nodes[l]});
        r.w.push_back(leg.weights[i] * jac.weights[l]);
      }
  }
  return r;
}

int tri_bubble_count(int k) { return (k - 1) * (k - 2) / 2; }
int quad_bubble_count(int k) { return (k - 1) * (k - 1); }

void run_parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

struct DofLayout {
  std::size_t ndofs = 0;
  std::vector<std::vector<std::size_t>> l2g;
  std::vector<bool> dirichlet;
};

DofLayout build_layout(const PyramidMesh& mesh, int k) {
  const int ne = k - 1;
  const int nt = tri_bubble_count(k);
  const int nq = quad_bubble_count(k);
  const int ni = static_cast<int>(interior_bubbles(0, k).size());

  DofLayout lay;
  // vertex dofs first
  lay.ndofs = mesh.vertices.size();
  lay.dirichlet.resize(lay.ndofs);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    lay.dirichlet[v] = on_cube_boundary(mesh.vertices[v]);

  std::map<std::array<std::size_t, 2>, std::size_t> edge_base;
  std::map<std::array<std::size_t, 3>, std::size_t> tri_base;
  std::map<std::array<std::size_t, 4>, std::size_t> quad_base;

  auto claim = [&](std::size_t count, bool bdy) {
    std::size_t base = lay.ndofs;
    lay.ndofs += count;
    lay.dirichlet.resize(lay.ndofs, bdy);
    return base;
  };

  for (const auto& el : mesh.elements) {
    std::vector<std::size_t> dofs;
    for (int v = 0; v < 5; ++v) dofs.push_back(el.gv[v]);

    for (const auto& e : kLocalEdges) {
      std::array<std::size_t, 2> key = {el.gv[e[0]], el.gv[e[1]]};
      std::sort(key.begin(), key.end());
      auto it = edge_base.find(key);
      if (it == edge_base.end()) {
        bool bdy = on_cube_boundary(rat_midpoint(mesh.vertices[key[0]],
                                                 mesh.vertices[key[1]]));
        it = edge_base.emplace(key, claim(ne, bdy)).first;
      }
      for (int i = 0; i < ne; ++i) dofs.push_back(it->second + i);
    }

    for (const auto& tf : kTriFaces) {
      std::array<std::size_t, 3> key = {el.gv[tf.corners[0]],
                                        el.gv[tf.corners[1]],
                                        el.gv[tf.corners[2]]};
      std::sort(key.begin(), key.end());
      auto it = tri_base.find(key);
      if (it == tri_base.end()) {
        RatVec3 c = mesh.vertices[key[0]];
        for (int d = 0; d < 3; ++d)
          c[d] = (mesh.vertices[key[0]][d] + mesh.vertices[key[1]][d] +
                  mesh.vertices[key[2]][d]) /
                 3;
        it = tri_base.emplace(key, claim(nt, on_cube_boundary(c))).first;
      }
      for (int i = 0; i < nt; ++i) dofs.push_back(it->second + i);
    }

    {
      std::array<std::size_t, 4> key = {el.gv[0], el.gv[1], el.gv[2],
                                        el.gv[3]};
      std::sort(key.begin(), key.end());
      auto it = quad_base.find(key);
      if (it == quad_base.end()) {
        RatVec3 c;
        for (int d = 0; d < 3; ++d)
          c[d] = (mesh.vertices[key[0]][d] + mesh.vertices[key[1]][d] +
                  mesh.vertices[key[2]][d] + mesh.vertices[key[3]][d]) /
                 4;
        it = quad_base.emplace(key, claim(nq, on_cube_boundary(c))).first;
      }
      for (int i = 0; i < nq; ++i) dofs.push_back(it->second + i);
    }

    std::size_t ibase = claim(ni, false);
    for (int i = 0; i < ni; ++i) dofs.push_back(ibase + i);

    lay.l2g.push_back(std::move(dofs));
  }
  return lay;
}

// Element DOF matrix: D(i, j) = functional_i(basis_j) over the conforming
// basis; X = D^{-1} holds the dual shape functions.
Eigen::MatrixXd element_shape_matrix(const PyramidMesh& mesh,
                                     const MeshElement& el, int k) {
  const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
  const std::size_t n = conf.dim();
  Eigen::MatrixXd D(n, n);
  std::size_t row = 0;
  const int ng = k + 2;
  Rule1D leg = gauss_legendre(ng);
  const Eigen::Matrix3d J = el.K.jacobian();

  auto eval_basis = [&](std::size_t j, const Vec3& p) {
    return conf.basis[j].comp[0].evaluate_reference(p[0], p[1], p[2]);
  };

  // vertex values (apex value = coefficient of the constant monomial)
  for (int v = 0; v < 4; ++v)
    for (std::size_t j = 0; j < n; ++j) D(row + v, j) = eval_basis(j, kRefVerts[v]);
  for (std::size_t j = 0; j < n; ++j) {
    auto it = conf.basis[j].comp[0].terms().find(Monomial{0, 0, 0});
    D(row + 4, j) =
        it == conf.basis[j].comp[0].terms().end() ? 0.0 : to_double(it->second);
  }
  row += 5;

  // edge moments, parameterized from the lowest global vertex id
  for (const auto& e : kLocalEdges) {
    int lo = e[0], hi = e[1];
    if (el.gv[hi] < el.gv[lo]) std::swap(lo, hi);
    Vec3 p0 = kRefVerts[lo], d = kRefVerts[hi] - kRefVerts[lo];
    for (int i = 0; i <= k - 2; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int g = 0; g < ng; ++g) {
          Vec3 p = p0 + leg.nodes[g] * d;
          acc += leg.weights[g] * eval_basis(j, p) *
                 std::pow(leg.nodes[g], i);
        }
        D(row, j) = acc;
      }
      ++row;
    }
  }

  // triangular face bubble moments in sorted-id barycentric coordinates
  for (const auto& tf : kTriFaces) {
    if (tri_bubble_count(k) == 0) break;
    // barycentric polys at params: corner0 -> 1-s-t, corner1 -> s, corner2 -> t
    std::array<P2, 3> lam;
    lam[0].add(0, 0, 1);
    lam[0].add(1, 0, -1);
    lam[0].add(0, 1, -1);
    lam[1].add(1, 0, 1);
    lam[2].add(0, 1, 1);
    std::array<std::pair<std::size_t, int>, 3> order;
    for (int c = 0; c < 3; ++c) order[c] = {el.gv[tf.corners[c]], c};
    std::sort(order.begin(), order.end());
    P2 bubble = p2_mul(p2_mul(lam[0], lam[1]), lam[2]);
    auto [t1, t2] = face_tangents(tf.f);
    double area = ((J * t1).cross(J * t2)).norm();
    Rule2D fr = face_rule(tf.f, ng);
    for (int i = 0; i + 0 <= k - 3; ++i)
      for (int jj = 0; i + jj <= k - 3; ++jj) {
        P2 m = p2_mul(bubble, p2_mul(p2_pow(lam[order[0].second], i),
                                     p2_pow(lam[order[1].second], jj)));
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t g = 0; g < fr.pts.size(); ++g) {
            Vec3 p = face_point(tf.f, fr.pts[g][0], fr.pts[g][1]);
            acc += fr.w[g] * eval_basis(j, p) *
                   m.eval(fr.pts[g][0], fr.pts[g][1]);
          }
          D(row, j) = acc * area;
        }
        ++row;
      }
  }

  // quadrilateral face bubble moments in lowest-corner axis coordinates
  if (quad_bubble_count(k) > 0) {
    // param coordinates of the base corners
    const std::array<std::array<double, 2>, 4> pc = {
        {{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    int c0 = 0;
    for (int c = 1; c < 4; ++c)
      if (el.gv[kQuadCorners[c]] < el.gv[kQuadCorners[c0]]) c0 = c;
    int na = (c0 + 1) % 4, nb = (c0 + 3) % 4;  // neighbours of c0
    if (el.gv[kQuadCorners[nb]] < el.gv[kQuadCorners[na]]) std::swap(na, nb);
    // alpha: 0 at c0, 1 at na; beta: 0 at c0, 1 at nb; both in {s,1-s,t,1-t}
    auto axis_poly = [&](int target) {
      P2 a;
      if (pc[c0][0] != pc[target][0]) {  // varies in s
        if (pc[c0][0] == 0.0) {
          a.add(1, 0, 1);
        } else {
          a.add(0, 0, 1);
          a.add(1, 0, -1);
        }
      } else {
        if (pc[c0][1] == 0.0) {
          a.add(0, 1, 1);
        } else {
          a.add(0, 0, 1);
          a.add(0, 1, -1);
        }
      }
      return a;
    };
    P2 alpha = axis_poly(na), beta = axis_poly(nb);
    P2 one_minus_alpha, one_minus_beta;
    one_minus_alpha.add(0, 0, 1);
    for (const auto& [m, c] : alpha.t) one_minus_alpha.add(m.first, m.second, -c);
    one_minus_beta.add(0, 0, 1);
    for (const auto& [m, c] : beta.t) one_minus_beta.add(m.first, m.second, -c);
    P2 bubble = p2_mul(p2_mul(alpha, one_minus_alpha),
                       p2_mul(beta, one_minus_beta));
    auto [t1, t2] = face_tangents(Face::Base);
    double area = ((J * t1).cross(J * t2)).norm();
    Rule2D fr = face_rule(Face::Base, ng);
    for (int i = 0; i <= k - 2; ++i)
      for (int jj = 0; jj <= k - 2; ++jj) {
        P2 m = p2_mul(bubble, p2_mul(p2_pow(alpha, i), p2_pow(beta, jj)));
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t g = 0; g < fr.pts.size(); ++g) {
            Vec3 p = face_point(Face::Base, fr.pts[g][0], fr.pts[g][1]);
            acc += fr.w[g] * eval_basis(j, p) *
                   m.eval(fr.pts[g][0], fr.pts[g][1]);
          }
          D(row, j) = acc * area;
        }
        ++row;
      }
  }

  // interior moments against interior bubbles (exact reference integrals)
  Rational dj = el.K.det_exact();
  if (dj < 0) dj = -dj;
  for (const auto& bub : interior_bubbles(0, k)) {
    for (std::size_t j = 0; j < n; ++j)
      D(row, j) = to_double(
          dj * (conf.basis[j].comp[0] * bub.comp[0]).integrate_reference());
    ++row;
  }

  if (row != n)
    throw SingularSystem("element dof count " + std::to_string(row) +
                         " does not match conforming dimension " +
                         std::to_string(n));
  return D;
}

Eigen::MatrixXd invert_shape(const Eigen::MatrixXd& D) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  if (!lu.isInvertible())
    throw SingularSystem("element dof matrix is singular");
  return lu.inverse();
}

// stiffness over the conforming basis: S_ij = int (grad b_i)^T A (grad b_j)
Eigen::MatrixXd conf_stiffness(const AffinePyramid& K,
                               const CoefficientTensor& A, int k,
                               const PyramidRule& rule) {
  const auto& dh = conforming_dhats(0, k);
  const std::size_t n = dh.size();
  const std::size_t nq = rule.points.size();
  Eigen::MatrixXd W = push_weight(K, 1);
  double dj = std::abs(K.det());

  std::vector<Eigen::MatrixXd> g(n, Eigen::MatrixXd(3, nq));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t q = 0; q < nq; ++q)
      g[i].col(q) = W * eval_hat(dh[i], rule.points[q]);
  std::vector<Eigen::MatrixXd> Aq(nq);
  for (std::size_t q = 0; q < nq; ++q) Aq[q] = A.eval(K.map(rule.points[q]));

  Eigen::MatrixXd S(n, n);
  std::vector<double> acc(nq);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t q = 0; q < nq; ++q)
        acc[q] = rule.weights[q] * g[i].col(q).dot(Aq[q] * g[j].col(q));
      S(i, j) = S(j, i) = dj * pairwise_sum(acc);
    }
  return S;
}

// v_i = int (grad b_i)^T A grad(u) for an evaluable scalar field u
Eigen::VectorXd conf_grad_vector(const AffinePyramid& K,
                                 const CoefficientTensor& A, const FormField& u,
                                 int k, const PyramidRule& rule) {
  const auto& dh = conforming_dhats(0, k);
  const std::size_t n = dh.size();
  const std::size_t nq = rule.points.size();
  Eigen::MatrixXd W = push_weight(K, 1);
  double dj = std::abs(K.det());

  std::vector<std::vector<double>> acc(n, std::vector<double>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    Vec3 x = K.map(rule.points[q]);
    Eigen::VectorXd Agu = A.eval(x) * u.dvalue(x);
    for (std::size_t i = 0; i < n; ++i)
      acc[i][q] =
          rule.weights[q] * (W * eval_hat(dh[i], rule.points[q])).dot(Agu);
  }
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = dj * pairwise_sum(acc[i]);
  return v;
}

// exact conforming mass matrix scaled by |det J|
Eigen::MatrixXd conf_mass(const AffinePyramid& K, int k) {
  const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
  const std::size_t n = conf.dim();
  Rational dj = K.det_exact();
  if (dj < 0) dj = -dj;
  Eigen::MatrixXd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Rational v =
          dj * (conf.basis[i].comp[0] * conf.basis[j].comp[0]).integrate_reference();
      M(i, j) = M(j, i) = to_double(v);
    }
  return M;
}

double fit_slope(const std::vector<double>& logh, const std::vector<double>& loge) {
  double n = static_cast<double>(logh.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logh.size(); ++i) {
    sx += logh[i];
    sy += loge[i];
    sxx += logh[i] * logh[i];
    sxy += logh[i] * loge[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("PYRAFEM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

PyramidMesh build_cube_mesh(int n) {
  if (n < 1) throw InvalidOrder("mesh subdivision must be >= 1");
  PyramidMesh mesh;
  mesh.n = n;

  auto grid_id = [&](int i, int j, int k) {
    return static_cast<std::size_t>((i * (n + 1) + j) * (n + 1) + k);
  };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k)
        mesh.vertices.push_back({rat(i, n), rat(j, n), rat(k, n)});
  std::size_t center_base = mesh.vertices.size();
  auto center_id = [&](int i, int j, int k) {
    return center_base + static_cast<std::size_t>((i * n + j) * n + k);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        mesh.vertices.push_back({rat(2 * i + 1, 2 * n), rat(2 * j + 1, 2 * n),
                                 rat(2 * k + 1, 2 * n)});

  // faces of the unit subcube, corners ccw
  const std::array<std::array<std::array<int, 3>, 4>, 6> faces = {{
      {{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}},  // z = 0
      {{{0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {1, 0, 1}}},  // z = 1
      {{{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 0, 0}}},  // y = 0
      {{{0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}}},  // y = 1
      {{{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}}},  // x = 0
      {{{1, 0, 0}, {1, 0, 1}, {1, 1, 1}, {1, 1, 0}}},  // x = 1
  }};

  for (int ci = 0; ci < n; ++ci)
    for (int cj = 0; cj < n; ++cj)
      for (int ck = 0; ck < n; ++ck) {
        std::size_t apex_id = center_id(ci, cj, ck);
        for (const auto& face : faces) {
          std::array<std::size_t, 5> gv;
          for (int c = 0; c < 4; ++c)
            gv[c] = grid_id(ci + face[c][0], cj + face[c][1], ck + face[c][2]);
          gv[4] = apex_id;
          const RatVec3& v0 = mesh.vertices[gv[0]];
          const RatVec3& v1 = mesh.vertices[gv[1]];
          const RatVec3& v3 = mesh.vertices[gv[3]];
          const RatVec3& ap = mesh.vertices[gv[4]];
          RatVec3 e1 = {v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2]};
          RatVec3 e2 = {v3[0] - v0[0], v3[1] - v0[1], v3[2] - v0[2]};
          mesh.elements.push_back({AffinePyramid(v0, e1, e2, ap), gv});
        }
      }

  mesh.h = 0.0;
  mesh.rho_max = 0.0;
  for (const auto& el : mesh.elements) {
    ShapeParams sp = shape_params(el.K);
    mesh.h = std::max(mesh.h, sp.h);
    mesh.rho_max = std::max(mesh.rho_max, sp.rho);
  }
  return mesh;
}

void dump_mesh_json(const PyramidMesh& mesh, std::ostream& os) {
  os << "{\n  \"vertices\": [";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    os << (v ? ", " : "") << "[" << to_double(mesh.vertices[v][0]) << ", "
       << to_double(mesh.vertices[v][1]) << ", "
       << to_double(mesh.vertices[v][2]) << "]";
  }
  os << "],\n  \"elements\": [";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    auto vec = [&](const RatVec3& p) {
      os << "[" << to_double(p[0]) << ", " << to_double(p[1]) << ", "
         << to_double(p[2]) << "]";
    };
    os << (e ? ",\n    " : "\n    ") << "{\"v0\": ";
    vec(el.K.v0());
    os << ", \"e1\": ";
    vec(el.K.e1());
    os << ", \"e2\": ";
    vec(el.K.e2());
    os << ", \"apex\": ";
    vec(el.K.apex());
    os << ", \"global_vertex_ids\": [";
    for (int v = 0; v < 5; ++v) os << (v ? ", " : "") << el.gv[v];
    os << "]}";
  }
  os << "\n  ]\n}\n";
}

GlobalSystem assemble_poisson(const PyramidMesh& mesh, int k,
                              const CoefficientTensor& A,
                              const std::function<double(const Vec3&)>& f,
                              int q) {
  if (q < 0) throw InvalidOrder("quadrature order must be >= 0");
  if (A.s != 1)
    throw DimensionMismatch("Poisson coefficient must act on gradients");

  DofLayout lay = build_layout(mesh, k);
  const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
  const std::size_t n = conf.dim();
  const std::size_t nel = mesh.elements.size();

  GlobalSystem gs;
  gs.k = k;
  gs.mesh = &mesh;
  gs.ndofs = lay.ndofs;
  gs.dirichlet = lay.dirichlet;
  gs.l2g = lay.l2g;
  gs.shape.resize(nel);

  PyramidRule rule = conical_rule(q);
  PyramidRule frule = conical_rule(k + 2);

  std::vector<Eigen::MatrixXd> Kloc(nel);
  std::vector<Eigen::VectorXd> Floc(nel);
  run_parallel(nel, [&](std::size_t e) {
    const MeshElement& el = mesh.elements[e];
    Eigen::MatrixXd X = invert_shape(element_shape_matrix(mesh, el, k));
    Eigen::MatrixXd S = conf_stiffness(el.K, A, k, rule);
    Eigen::VectorXd F(n);
    double dj = std::abs(el.K.det());
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> acc(frule.points.size());
      for (std::size_t g = 0; g < frule.points.size(); ++g)
        acc[g] = frule.weights[g] * f(el.K.map(frule.points[g])) *
                 conf.basis[j].comp[0].evaluate_reference(
                     frule.points[g][0], frule.points[g][1],
                     frule.points[g][2]);
      F(j) = dj * pairwise_sum(std::move(acc));
    }
    Kloc[e] = X.transpose() * S * X;
    Floc[e] = X.transpose() * F;
    gs.shape[e] = std::move(X);
  });

  std::vector<Eigen::Triplet<double>> trips;
  gs.b = Eigen::VectorXd::Zero(gs.ndofs);
  for (std::size_t e = 0; e < nel; ++e) {
    const auto& map = gs.l2g[e];
    for (std::size_t i = 0; i < n; ++i) {
      gs.b(map[i]) += Floc[e](i);
      for (std::size_t j = 0; j < n; ++j)
        trips.emplace_back(map[i], map[j], Kloc[e](i, j));
    }
  }
  gs.A.resize(gs.ndofs, gs.ndofs);
  gs.A.setFromTriplets(trips.begin(), trips.end());
  return gs;
}

Eigen::VectorXd solve_system(const GlobalSystem& gs) {
  std::vector<std::ptrdiff_t> idx(gs.ndofs, -1);
  std::size_t nf = 0;
  for (std::size_t i = 0; i < gs.ndofs; ++i)
    if (!gs.dirichlet[i]) idx[i] = static_cast<std::ptrdiff_t>(nf++);

  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < gs.A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(gs.A, c); it; ++it)
      if (idx[it.row()] >= 0 && idx[it.col()] >= 0)
        trips.emplace_back(idx[it.row()], idx[it.col()], it.value());
  Eigen::SparseMatrix<double> Aff(nf, nf);
  Aff.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd bf(nf);
  for (std::size_t i = 0; i < gs.ndofs; ++i)
    if (idx[i] >= 0) bf(idx[i]) = gs.b(i);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(Aff);
  if (chol.info() != Eigen::Success)
    throw IndefiniteSystem("Cholesky factorization of the reduced system failed");
  Eigen::VectorXd xf = chol.solve(bf);
  if (chol.info() != Eigen::Success)
    throw IndefiniteSystem("Cholesky back-substitution failed");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(gs.ndofs);
  for (std::size_t i = 0; i < gs.ndofs; ++i)
    if (idx[i] >= 0) x(i) = xf(idx[i]);
  return x;
}

std::pair<double, double> error_norms(const GlobalSystem& gs,
                                      const Eigen::VectorXd& sol,
                                      const FormField& exact) {
  const int k = gs.k;
  const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
  const auto& dh = conforming_dhats(0, k);
  const std::size_t n = conf.dim();
  PyramidRule rule = conical_rule(k + 3);
  const std::size_t nel = gs.mesh->elements.size();

  std::vector<double> l2(nel, 0.0), h1(nel, 0.0);
  run_parallel(nel, [&](std::size_t e) {
    const MeshElement& el = gs.mesh->elements[e];
    Eigen::VectorXd gloc(n);
    for (std::size_t i = 0; i < n; ++i) gloc(i) = sol(gs.l2g[e][i]);
    Eigen::VectorXd c = gs.shape[e] * gloc;
    Eigen::MatrixXd W = push_weight(el.K, 1);
    double dj = std::abs(el.K.det());
    std::vector<double> a0(rule.points.size()), a1(rule.points.size());
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      const Vec3& p = rule.points[g];
      Vec3 x = el.K.map(p);
      double v = 0.0;
      Eigen::Vector3d gv = Eigen::Vector3d::Zero();
      for (std::size_t j = 0; j < n; ++j) {
        v += c(j) *
             conf.basis[j].comp[0].evaluate_reference(p[0], p[1], p[2]);
        gv += c(j) * (W * eval_hat(dh[j], p));
      }
      double dv = v - exact.value(x)(0);
      Eigen::Vector3d dg = gv - Eigen::Vector3d(exact.dvalue(x));
      a0[g] = rule.weights[g] * dv * dv;
      a1[g] = rule.weights[g] * dg.squaredNorm();
    }
    l2[e] = dj * pairwise_sum(std::move(a0));
    h1[e] = dj * pairwise_sum(std::move(a1));
  });
  double sl2 = pairwise_sum(std::move(l2));
  double sh1 = pairwise_sum(std::move(h1));
  return {std::sqrt(sl2), std::sqrt(sh1)};
}

FormField ManufacturedSolution::field() const {
  return scalar_field(value, grad);
}

CoefficientTensor coefficient_preset(const std::string& name) {
  if (name == "identity") return CoefficientTensor::identity(1);
  if (name == "poly1")
    return CoefficientTensor::from_field(
        1,
        [](const Vec3& x) {
          return Eigen::MatrixXd((1.0 + x[0] * x[1]) *
                                 Eigen::Matrix3d::Identity());
        },
        8);
  if (name == "smooth")
    return CoefficientTensor::from_field(
        1,
        [](const Vec3& x) {
          Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
          m(0, 0) = std::exp(x[0]);
          m(1, 1) = std::exp(x[1]);
          m(2, 2) = std::exp(x[2]);
          return Eigen::MatrixXd(m);
        },
        8);
  throw InvalidOrder("unknown coefficient preset: " + name);
}

ManufacturedSolution solution_preset(const std::string& name) {
  ManufacturedSolution u;
  u.name = name;
  if (name == "sin3") {
    u.value = [](const Vec3& x) {
      return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
    u.grad = [](const Vec3& x) {
      double s0 = std::sin(kPi * x[0]), c0 = std::cos(kPi * x[0]);
      double s1 = std::sin(kPi * x[1]), c1 = std::cos(kPi * x[1]);
      double s2 = std::sin(kPi * x[2]), c2 = std::cos(kPi * x[2]);
      return Vec3(kPi * c0 * s1 * s2, kPi * s0 * c1 * s2, kPi * s0 * s1 * c2);
    };
    u.hess = [](const Vec3& x) {
      double s0 = std::sin(kPi * x[0]), c0 = std::cos(kPi * x[0]);
      double s1 = std::sin(kPi * x[1]), c1 = std::cos(kPi * x[1]);
      double s2 = std::sin(kPi * x[2]), c2 = std::cos(kPi * x[2]);
      double p2 = kPi * kPi;
      Mat3 h;
      h << -p2 * s0 * s1 * s2, p2 * c0 * c1 * s2, p2 * c0 * s1 * c2,
          p2 * c0 * c1 * s2, -p2 * s0 * s1 * s2, p2 * s0 * c1 * c2,
          p2 * c0 * s1 * c2, p2 * s0 * c1 * c2, -p2 * s0 * s1 * s2;
      return h;
    };
    return u;
  }
  if (name == "poly_bubble") {
    auto b = [](double t) { return t * (1.0 - t); };
    auto db = [](double t) { return 1.0 - 2.0 * t; };
    u.value = [b](const Vec3& x) { return b(x[0]) * b(x[1]) * b(x[2]); };
    u.grad = [b, db](const Vec3& x) {
      return Vec3(db(x[0]) * b(x[1]) * b(x[2]), b(x[0]) * db(x[1]) * b(x[2]),
                  b(x[0]) * b(x[1]) * db(x[2]));
    };
    u.hess = [b, db](const Vec3& x) {
      Mat3 h;
      h << -2.0 * b(x[1]) * b(x[2]), db(x[0]) * db(x[1]) * b(x[2]),
          db(x[0]) * b(x[1]) * db(x[2]), db(x[0]) * db(x[1]) * b(x[2]),
          -2.0 * b(x[0]) * b(x[2]), b(x[0]) * db(x[1]) * db(x[2]),
          db(x[0]) * b(x[1]) * db(x[2]), b(x[0]) * db(x[1]) * db(x[2]),
          -2.0 * b(x[0]) * b(x[1]);
      return h;
    };
    return u;
  }
  throw InvalidOrder("unknown solution preset: " + name);
}

std::function<double(const Vec3&)> poisson_source(
    const std::string& a_name, const ManufacturedSolution& u) {
  if (a_name == "identity")
    return [u](const Vec3& x) { return -u.hess(x).trace(); };
  if (a_name == "poly1")
    return [u](const Vec3& x) {
      Vec3 g = u.grad(x);
      // -div((1 + x0 x1) grad u)
      return -(x[1] * g[0] + x[0] * g[1]) -
             (1.0 + x[0] * x[1]) * u.hess(x).trace();
    };
  if (a_name == "smooth")
    return [u](const Vec3& x) {
      Vec3 g = u.grad(x);
      Mat3 h = u.hess(x);
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) acc -= std::exp(x[i]) * (g[i] + h(i, i));
      return acc;
    };
  throw InvalidOrder("unknown coefficient preset: " + a_name);
}

namespace {

void fill_rates(StudyResult& r) {
  std::vector<double> lh, ll2, lh1, lc;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    StudyRow& row = r.rows[i];
    if (i > 0) {
      const StudyRow& prev = r.rows[i - 1];
      double dh = std::log(prev.h / row.h);
      auto rate = [&](double a, double b) {
        return (a > 0 && b > 0) ? std::log(a / b) / dh : 0.0;
      };
      row.rate_l2 = rate(prev.l2_error, row.l2_error);
      row.rate_h1 = rate(prev.h1_error, row.h1_error);
      row.rate_consistency = rate(prev.consistency, row.consistency);
    }
    lh.push_back(std::log(row.h));
    if (row.l2_error > 0) ll2.push_back(std::log(row.l2_error));
    if (row.h1_error > 0) lh1.push_back(std::log(row.h1_error));
    if (row.consistency > 0) lc.push_back(std::log(row.consistency));
  }
  if (ll2.size() == r.rows.size() && r.rows.size() > 1)
    r.fitted_l2 = fit_slope(lh, ll2);
  if (lh1.size() == r.rows.size() && r.rows.size() > 1)
    r.fitted_h1 = fit_slope(lh, lh1);
  if (lc.size() == r.rows.size() && r.rows.size() > 1)
    r.fitted_consistency = fit_slope(lh, lc);
}

}  // namespace

StudyResult convergence_study(int k, int q, const std::vector<int>& ns,
                              const std::string& a_name,
                              const ManufacturedSolution& u) {
  CoefficientTensor A = coefficient_preset(a_name);
  auto f = poisson_source(a_name, u);
  FormField uf = u.field();

  StudyResult res;
  for (int n : ns) {
    PyramidMesh mesh = build_cube_mesh(n);
    GlobalSystem gs = assemble_poisson(mesh, k, A, f, q);
    Eigen::VectorXd sol = solve_system(gs);
    auto [l2, h1] = error_norms(gs, sol, uf);
    StudyRow row;
    row.n = n;
    row.h = mesh.h;
    row.dofs = gs.ndofs;
    row.l2_error = l2;
    row.h1_error = h1;
    res.rows.push_back(row);
  }
  fill_rates(res);
  return res;
}

StudyResult consistency_study(int k, const std::vector<int>& ns,
                              const std::string& a_name,
                              const ManufacturedSolution& u) {
  CoefficientTensor A = coefficient_preset(a_name);
  CoefficientTensor I = CoefficientTensor::identity(1);
  FormField uf = u.field();

  StudyResult res;
  for (int n : ns) {
    PyramidMesh mesh = build_cube_mesh(n);
    DofLayout lay = build_layout(mesh, k);
    const std::size_t nel = mesh.elements.size();
    const std::size_t nb = space_basis(0, k, Family::Conforming).dim();

    PyramidRule low = conical_rule(k);
    PyramidRule ref = conical_rule(k + 4);

    std::vector<Eigen::VectorXd> eloc(nel);
    std::vector<Eigen::VectorXd> mdiag_loc(nel), sdiag_loc(nel);
    run_parallel(nel, [&](std::size_t e) {
      const MeshElement& el = mesh.elements[e];
      Eigen::MatrixXd X = invert_shape(element_shape_matrix(mesh, el, k));
      // quadrature error of the order-k rule on A(grad u, grad w):
      // a(u, w) by the reference rule minus a_h(u, w) by the order-k rule
      eloc[e] = X.transpose() * (conf_grad_vector(el.K, A, uf, k, ref) -
                                 conf_grad_vector(el.K, A, uf, k, low));
      Eigen::MatrixXd M = X.transpose() * conf_mass(el.K, k) * X;
      Eigen::MatrixXd S = X.transpose() * conf_stiffness(el.K, I, k, ref) * X;
      mdiag_loc[e] = M.diagonal();
      sdiag_loc[e] = S.diagonal();
    });

    Eigen::VectorXd r = Eigen::VectorXd::Zero(lay.ndofs);
    Eigen::VectorXd md = Eigen::VectorXd::Zero(lay.ndofs);
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(lay.ndofs);
    for (std::size_t e = 0; e < nel; ++e)
      for (std::size_t i = 0; i < nb; ++i) {
        r(lay.l2g[e][i]) += eloc[e](i);
        md(lay.l2g[e][i]) += mdiag_loc[e](i);
        sd(lay.l2g[e][i]) += sdiag_loc[e](i);
      }

    StudyRow row;
    row.n = n;
    row.h = mesh.h;
    row.dofs = lay.ndofs;
    for (std::size_t g = 0; g < lay.ndofs; ++g) {
      if (lay.dirichlet[g]) continue;  // sup runs over the H^1_0 subspace
      row.consistency =
          std::max(row.consistency, std::abs(r(g)) / std::sqrt(md(g)));
      row.consistency_h1 = std::max(
          row.consistency_h1, std::abs(r(g)) / std::sqrt(md(g) + sd(g)));
    }
    res.rows.push_back(row);
  }
  fill_rates(res);
  return res;
}

void write_csv(const StudyResult& r, std::ostream& os) {
  os.precision(17);
  os << "n,h,dofs,l2_error,h1_error,consistency,rate_l2,rate_h1,"
        "rate_consistency\n";
  for (const auto& row : r.rows)
    os << row.n << "," << row.h << "," << row.dofs << "," << row.l2_error
       << "," << row.h1_error << "," << row.consistency << "," << row.rate_l2
       << "," << row.rate_h1 << "," << row.rate_consistency << "\n";
}

void write_json(const StudyResult& r, std::ostream& os) {
  os.precision(17);
  os << "{\n  \"rows\": [";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    os << (i ? ",\n    " : "\n    ") << "{\"n\": " << row.n
       << ", \"h\": " << row.h << ", \"dofs\": " << row.dofs
       << ", \"l2_error\": " << row.l2_error
       << ", \"h1_error\": " << row.h1_error
       << ", \"consistency\": " << row.consistency
       << ", \"consistency_h1\": " << row.consistency_h1
       << ", \"rate_l2\": " << row.rate_l2 << ", \"rate_h1\": " << row.rate_h1
       << ", \"rate_consistency\": " << row.rate_consistency << "}";
  }
  os << "\n  ],\n  \"fitted_l2\": " << r.fitted_l2
     << ",\n  \"fitted_h1\": " << r.fitted_h1
     << ",\n  \"fitted_consistency\": " << r.fitted_consistency << "\n}\n";
}

}  // namespace pyrafem
