#pragma once

#include <Eigen/Sparse>
#include <iosfwd>
#include <string>

#include "pyrafem/interpolate.hpp"

namespace pyrafem {

struct MeshElement {
  AffinePyramid K;
  std::array<std::size_t, 5> gv;  // global vertex ids: base ccw, then apex
};

struct PyramidMesh {
  int n = 1;
  std::vector<RatVec3> vertices;
  std::vector<MeshElement> elements;
  double h = 0.0;
  double rho_max = 0.0;
};

/// Unit cube split into n^3 subcubes, each into 6 pyramids with apex at
/// the subcube centre.
PyramidMesh build_cube_mesh(int n);

void dump_mesh_json(const PyramidMesh& mesh, std::ostream& os);

/// Global H^1-conforming system for -div(A grad u) = f with homogeneous
/// Dirichlet conditions.  DOFs are entity-intrinsic moment functionals
/// (vertex values; edge moments parameterized from the lowest global
/// vertex id; face bubble moments in sorted-id barycentric/axis
/// coordinates; per-element interior moments), which makes shared-entity
/// coefficients mean the same thing on both sides of a face.
struct GlobalSystem {
  int k = 1;
  const PyramidMesh* mesh = nullptr;
  std::size_t ndofs = 0;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<bool> dirichlet;
  std::vector<Eigen::MatrixXd> shape;           // per element: conforming
                                                // coeffs of dual shape fns
  std::vector<std::vector<std::size_t>> l2g;    // per element dof map
};

GlobalSystem assemble_poisson(const PyramidMesh& mesh, int k,
                              const CoefficientTensor& A,
                              const std::function<double(const Vec3&)>& f,
                              int q);

/// Cholesky solve of the Dirichlet-reduced system.
Eigen::VectorXd solve_system(const GlobalSystem& gs);

/// (L2 error, H1 seminorm error) of the discrete solution against an
/// exact solution given as a scalar FormField.
std::pair<double, double> error_norms(const GlobalSystem& gs,
                                      const Eigen::VectorXd& sol,
                                      const FormField& exact);

struct ManufacturedSolution {
  std::string name;
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> grad;
  std::function<Mat3(const Vec3&)> hess;

  FormField field() const;
};

/// Coefficient presets acting on gradients (s = 1): "identity",
/// "poly1" ((1 + x1 x2) I), "smooth" (diag(exp(x_i))).
CoefficientTensor coefficient_preset(const std::string& name);
/// Solution presets: "sin3", "poly_bubble"; both vanish on the boundary.
ManufacturedSolution solution_preset(const std::string& name);
/// f = -div(A grad u) for a preset pair, assembled from closed-form
/// derivatives of the preset coefficient.
std::function<double(const Vec3&)> poisson_source(const std::string& a_name,
                                                  const ManufacturedSolution& u);

struct StudyRow {
  int n = 0;
  double h = 0.0;
  std::size_t dofs = 0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double consistency = 0.0;     // |a(u,w) - a_h(u,w)| / ||w||_0, max over
                                // the global basis: quadrature error of
                                // the order-k rule on the exact solution
  double consistency_h1 = 0.0;  // same numerator over ||w||_1
  double rate_l2 = 0.0;         // vs previous row
  double rate_h1 = 0.0;
  double rate_consistency = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double fitted_l2 = 0.0;  // least-squares slopes on log h
  double fitted_h1 = 0.0;
  double fitted_consistency = 0.0;
};

StudyResult convergence_study(int k, int q, const std::vector<int>& ns,
                              const std::string& a_name,
                              const ManufacturedSolution& u);

StudyResult consistency_study(int k, const std::vector<int>& ns,
                              const std::string& a_name,
                              const ManufacturedSolution& u);

void write_csv(const StudyResult& r, std::ostream& os);
void write_json(const StudyResult& r, std::ostream& os);

/// Worker count: PYRAFEM_THREADS if set, else hardware concurrency.
int worker_count();

}  // namespace pyrafem
