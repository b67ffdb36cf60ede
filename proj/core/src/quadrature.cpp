#include "pyrafem/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "pyrafem/errors.hpp"

namespace pyrafem {

namespace {

// Nodes/weights on [0,1] from the three-term recurrence of polynomials
// orthogonal w.r.t. (1-x)^alpha (1+x)^beta on [-1,1], shifted.
Rule1D golub_welsch_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw InvalidOrder("quadrature rule needs n >= 1 points");

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  auto diag = [&](int i) -> double {
    double s = 2.0 * i + alpha + beta;
    if (i == 0) return (beta - alpha) / (alpha + beta + 2.0);
    return (beta * beta - alpha * alpha) / (s * (s + 2.0));
  };
  auto offdiag = [&](int i) -> double {  // beta_i for i >= 1
    double s = 2.0 * i + alpha + beta;
    return 4.0 * i * (i + alpha) * (i + beta) * (i + alpha + beta) /
           (s * s * (s + 1.0) * (s - 1.0));
  };
  for (int i = 0; i < n; ++i) jac(i, i) = diag(i);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(offdiag(i));
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }

  // zeroth moment: int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1)
  double mu0 = std::pow(2.0, alpha + beta + 1.0) *
               std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
               std::tgamma(alpha + beta + 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success)
    throw Error("Golub-Welsch eigen-solve failed to converge");

  // shift [-1,1] -> [0,1]: weight function picks up 2^-(alpha+beta),
  // dx a further 1/2.
  double scale = std::pow(2.0, -(alpha + beta + 1.0));
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0 * scale;
  }
  return rule;
}

}  // namespace

Rule1D gauss_legendre(int n) { return golub_welsch_jacobi(n, 0.0, 0.0); }

Rule1D gauss_jacobi(int n, int alpha) {
  return golub_welsch_jacobi(n, static_cast<double>(alpha), 0.0);
}

PyramidRule conical_rule(int k) {
  if (k < 0) throw InvalidOrder("conical rule order must be >= 0");
  const int n = k + 1;
  Rule1D leg = gauss_legendre(n);
  Rule1D jac = gauss_jacobi20(n);

  PyramidRule rule;
  rule.order = k;
  rule.points.reserve(n * n * n);
  rule.weights.reserve(n * n * n);
  for (int l = 0; l < n; ++l) {
    double zeta = jac.nodes[l];
    double omz = 1.0 - zeta;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        rule.points.push_back({leg.nodes[i] * omz, leg.nodes[j] * omz, zeta});
        rule.weights.push_back(leg.weights[i] * leg.weights[j] *
                               jac.weights[l]);
      }
  }
  return rule;
}

double pairwise_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n % 2 == 1) v[n / 2] = v[n - 1];
    n = half;
  }
  return v[0];
}

double integrate_reference_rule(const std::function<double(const Vec3&)>& f,
                                const PyramidRule& rule) {
  std::vector<double> vals(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    vals[q] = rule.weights[q] * f(rule.points[q]);
  return pairwise_sum(std::move(vals));
}

double integrate_reference_rule(const RationalPoly& p,
                                const PyramidRule& rule) {
  std::vector<double> vals(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec3& x = rule.points[q];
    vals[q] = rule.weights[q] * p.evaluate_reference(x[0], x[1], x[2]);
  }
  return pairwise_sum(std::move(vals));
}

double integrate_on_pyramid(const std::function<double(const Vec3&)>& f,
                            const AffinePyramid& K, const PyramidRule& rule) {
  double dj = std::abs(K.det());
  std::vector<double> vals(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    vals[q] = rule.weights[q] * f(K.map(rule.points[q]));
  return dj * pairwise_sum(std::move(vals));
}

double quad_error(const RationalPoly& p, const AffinePyramid& K,
                  const PyramidRule& rule) {
  double dj = std::abs(K.det());
  double s = dj * integrate_reference_rule(p, rule);
  double exact = dj * to_double(p.integrate_reference());
  return s - exact;
}

}  // namespace pyrafem
