#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pyrafem/meshfem.hpp"

using namespace pyrafem;

TEST_CASE("cube mesh covers the unit cube") {
  for (int n : {1, 2}) {
    PyramidMesh mesh = build_cube_mesh(n);
    std::size_t nv = (n + 1) * (n + 1) * (n + 1) + n * n * n;
    CHECK(mesh.vertices.size() == nv);
    CHECK(mesh.elements.size() == static_cast<std::size_t>(6 * n * n * n));
    Rational volume(0);
    for (const auto& el : mesh.elements) {
      Rational d = el.K.det_exact();
      if (d < 0) d = -d;
      volume += d / 3;
    }
    CHECK(volume == 1);
    CHECK(mesh.h > 0.5 / n);
    CHECK(mesh.h < 2.0 / n);
  }
}

TEST_CASE("mesh json dump lists vertices and elements") {
  PyramidMesh mesh = build_cube_mesh(1);
  std::ostringstream os;
  dump_mesh_json(mesh, os);
  std::string s = os.str();
  CHECK(s.find("\"vertices\"") != std::string::npos);
  CHECK(s.find("\"global_vertex_ids\"") != std::string::npos);
}

TEST_CASE("lowest-order dofs are exactly the mesh vertices") {
  PyramidMesh mesh = build_cube_mesh(2);
  CoefficientTensor A = CoefficientTensor::identity(1);
  GlobalSystem gs =
      assemble_poisson(mesh, 1, A, [](const Vec3&) { return 1.0; }, 1);
  CHECK(gs.ndofs == mesh.vertices.size());
  // boundary grid vertices of the 3x3x3 lattice: all but the centre one,
  // and none of the 8 subcube centres
  std::size_t nbdy = 0;
  for (bool b : gs.dirichlet) nbdy += b ? 1 : 0;
  CHECK(nbdy == 26);

  // assembled matrix is symmetric
  Eigen::SparseMatrix<double> d = gs.A - Eigen::SparseMatrix<double>(gs.A.transpose());
  CHECK(d.coeffs().cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Poisson solve reduces the error under refinement") {
  ManufacturedSolution u = solution_preset("sin3");
  CoefficientTensor A = coefficient_preset("identity");
  auto f = poisson_source("identity", u);
  double prev = 0.0;
  for (int n : {1, 2}) {
    PyramidMesh mesh = build_cube_mesh(n);
    GlobalSystem gs = assemble_poisson(mesh, 1, A, f, 2);
    Eigen::VectorXd sol = solve_system(gs);
    auto [l2, h1] = error_norms(gs, sol, u.field());
    CHECK(std::isfinite(l2));
    CHECK(std::isfinite(h1));
    if (n > 1) CHECK(h1 < prev);
    prev = h1;
  }
}

TEST_CASE("manufactured presets have consistent derivatives") {
  const double h = 1e-6;
  for (const char* name : {"sin3", "poly_bubble"}) {
    ManufacturedSolution u = solution_preset(name);
    Vec3 x(0.31, 0.42, 0.23);
    Vec3 g = u.grad(x);
    Mat3 hess = u.hess(x);
    for (int i = 0; i < 3; ++i) {
      Vec3 xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      CHECK(g[i] ==
            doctest::Approx((u.value(xp) - u.value(xm)) / (2 * h)).epsilon(1e-5));
      Vec3 dg = (u.grad(xp) - u.grad(xm)) / (2 * h);
      for (int j = 0; j < 3; ++j)
        CHECK(hess(j, i) == doctest::Approx(dg[j]).epsilon(1e-4));
    }
  }
}

TEST_CASE("poisson source matches a finite-difference divergence") {
  ManufacturedSolution u = solution_preset("sin3");
  for (const char* a : {"identity", "poly1", "smooth"}) {
    auto f = poisson_source(a, u);
    CoefficientTensor A = coefficient_preset(a);
    Vec3 x(0.3, 0.55, 0.2);
    const double h = 1e-5;
    // -div(A grad u) by central differences of the flux
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      Vec3 xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fp = (A.eval(xp) * Eigen::Vector3d(u.grad(xp)))(i);
      double fm = (A.eval(xm) * Eigen::Vector3d(u.grad(xm)))(i);
      acc -= (fp - fm) / (2 * h);
    }
    CHECK(f(x) == doctest::Approx(acc).epsilon(1e-6));
  }
}

TEST_CASE("study output formats") {
  StudyResult r;
  StudyRow a, b;
  a.n = 1;
  a.h = 1.0;
  a.dofs = 10;
  a.l2_error = 0.5;
  a.h1_error = 1.0;
  a.consistency = 0.25;
  b.n = 2;
  b.h = 0.5;
  b.dofs = 50;
  b.l2_error = 0.125;
  b.h1_error = 0.5;
  b.consistency = 0.0625;
  r.rows.push_back(a);
  r.rows.push_back(b);
  std::ostringstream csv, js;
  write_csv(r, csv);
  CHECK(csv.str().rfind(
            "n,h,dofs,l2_error,h1_error,consistency,rate_l2,rate_h1,"
            "rate_consistency\n", 0) == 0);
  write_json(r, js);
  CHECK(js.str().find("\"fitted_l2\"") != std::string::npos);
}

TEST_CASE("worker count honors the environment override") {
  CHECK(worker_count() >= 1);
}
