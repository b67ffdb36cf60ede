#include "pyrafem/element.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include "pyrafem/errors.hpp"
#include "pyrafem/interpolate.hpp"

namespace pyrafem {

namespace {

// Reference moments int_Khat hat_i[a] * hat_j[b] for a basis; they depend
// only on (s, k, family), so they are shared across coefficients and
// element maps.
struct MomentTable {
  std::size_t n = 0;
  int nc = 1;
  std::vector<Rational> m;  // indexed [((i*n)+j)*nc + a]*nc + b

  const Rational& at(std::size_t i, std::size_t j, int a, int b) const {
    return m[((i * n + j) * nc + a) * nc + b];
  }
};

const MomentTable& basis_moments(const SpaceBasis& basis) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, MomentTable> cache;
  std::tuple<int, int, int> key{basis.s, basis.k,
                                static_cast<int>(basis.family)};
  std::unique_lock<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  lock.unlock();

  const std::size_t n = basis.dim();
  const int nc = proxy_count(basis.s);
  std::vector<std::vector<RationalPoly>> hats(n);
  for (std::size_t i = 0; i < n; ++i)
    hats[i] = pullback_components(basis.basis[i]);

  MomentTable t;
  t.n = n;
  t.nc = nc;
  t.m.assign(n * n * nc * nc, Rational(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
          if (j == i && b < a) continue;
          Rational v = (hats[i][a] * hats[j][b]).integrate_reference();
          t.m[((i * n + j) * nc + a) * nc + b] = v;
          t.m[((j * n + i) * nc + b) * nc + a] = v;
        }

  lock.lock();
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

CoefficientTensor CoefficientTensor::identity(int s) {
  int n = proxy_count(s);
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return constant_exact(s, std::move(m));
}

CoefficientTensor CoefficientTensor::constant_exact(
    int s, std::vector<std::vector<Rational>> m) {
  CoefficientTensor A;
  A.s = s;
  A.constant = true;
  A.exact = std::move(m);
  if (static_cast<int>(A.exact.size()) != proxy_count(s))
    throw DimensionMismatch("coefficient tensor size mismatch");
  return A;
}

CoefficientTensor CoefficientTensor::from_field(
    int s, std::function<Eigen::MatrixXd(const Vec3&)> f, int smoothness) {
  CoefficientTensor A;
  A.s = s;
  A.constant = false;
  A.field = std::move(f);
  A.smoothness = smoothness;
  return A;
}

Eigen::MatrixXd CoefficientTensor::eval(const Vec3& x) const {
  if (!constant) return field(x);
  int n = proxy_count(s);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = to_double(exact[i][j]);
  return m;
}

Eigen::VectorXd eval_hat(const std::vector<RationalPoly>& hat, const Vec3& p) {
  Eigen::VectorXd v(hat.size());
  for (std::size_t i = 0; i < hat.size(); ++i)
    v(i) = hat[i].evaluate_reference(p[0], p[1], p[2]);
  return v;
}

Eigen::MatrixXd push_weight(const AffinePyramid& K, int s) {
  auto w = K.pullback_weight(s);
  int n = proxy_count(s);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = to_double(w[i][j]);
  return m;
}

ElementMatrix local_bilinear_matrix(const SpaceBasis& basis,
                                    const CoefficientTensor& A,
                                    const AffinePyramid& K,
                                    const PyramidRule& rule) {
  if (A.s != basis.s)
    throw DimensionMismatch("coefficient degree does not match basis degree");
  const std::size_t n = basis.dim();
  const std::size_t nq = rule.points.size();
  const int nc = proxy_count(basis.s);

  std::vector<std::vector<RationalPoly>> hats(n);
  for (std::size_t i = 0; i < n; ++i) hats[i] = pullback_components(basis.basis[i]);

  Eigen::MatrixXd W = push_weight(K, basis.s);
  const double dj = std::abs(K.det());

  // values of W * u_hat at each quadrature point
  std::vector<Eigen::MatrixXd> vals(n, Eigen::MatrixXd(nc, nq));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t q = 0; q < nq; ++q)
      vals[i].col(q) = W * eval_hat(hats[i], rule.points[q]);

  std::vector<Eigen::MatrixXd> Aq(nq);
  for (std::size_t q = 0; q < nq; ++q) Aq[q] = A.eval(K.map(rule.points[q]));

  ElementMatrix M(n, n);
  std::vector<double> terms(nq);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < nq; ++q)
        terms[q] = rule.weights[q] *
                   vals[i].col(q).dot(Aq[q] * vals[j].col(q));
      M(i, j) = dj * pairwise_sum(terms);
    }
  return M;
}

RatMatrix analytic_bilinear_matrix(const SpaceBasis& basis,
                                   const CoefficientTensor& A,
                                   const AffinePyramid& K) {
  if (!A.constant)
    throw DimensionMismatch("analytic oracle requires a constant coefficient");
  if (A.s != basis.s)
    throw DimensionMismatch("coefficient degree does not match basis degree");
  const std::size_t n = basis.dim();
  const int nc = proxy_count(basis.s);

  // A_hat = W^T A W, exact
  auto W = K.pullback_weight(basis.s);
  std::vector<std::vector<Rational>> Ahat(nc, std::vector<Rational>(nc, Rational(0)));
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      Rational acc(0);
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) acc += W[i][a] * A.exact[i][j] * W[j][b];
      Ahat[a][b] = acc;
    }

  const MomentTable& mom = basis_moments(basis);

  Rational dj = K.det_exact();
  if (dj < 0) dj = -dj;

  RatMatrix M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational v(0);
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
          if (Ahat[a][b] == 0) continue;
          v += Ahat[a][b] * mom.at(i, j, a, b);
        }
      M(i, j) = dj * v;
    }
  return M;
}

FormField scalar_field(std::function<double(const Vec3&)> v,
                       std::function<Vec3(const Vec3&)> grad) {
  FormField f;
  f.s = 0;
  f.value = [v = std::move(v)](const Vec3& x) {
    Eigen::VectorXd r(1);
    r(0) = v(x);
    return r;
  };
  f.dvalue = [grad = std::move(grad)](const Vec3& x) {
    Eigen::VectorXd r(3);
    r = grad(x);
    return r;
  };
  return f;
}

double consistency_error_element(const FormField& u,
                                 const CoefficientTensor& A,
                                 const AffinePyramid& K, int k) {
  if (u.s != 0 || A.s != 1)
    throw DimensionMismatch(
        "element consistency check expects a scalar field and a gradient "
        "coefficient");
  const SpaceBasis& conf = space_basis(0, k, Family::Conforming);
  const std::size_t n = conf.dim();

  Eigen::VectorXd c = interpolate(u, k, K);

  // gradient hat components of every basis function
  std::vector<std::vector<RationalPoly>> ghat(n);
  for (std::size_t i = 0; i < n; ++i)
    ghat[i] = pullback_components(exterior_derivative(conf.basis[i]));

  Eigen::MatrixXd W = push_weight(K, 1);
  const double dj = std::abs(K.det());

  PyramidRule low = conical_rule(k);
  PyramidRule ref = conical_rule(k + 4);

  auto accumulate = [&](const PyramidRule& rule,
                        std::vector<Eigen::VectorXd>& gw_all,
                        std::vector<Eigen::VectorXd>& agv) {
    const std::size_t nq = rule.points.size();
    std::vector<Eigen::MatrixXd> gw(n);  // per basis: 3 x nq physical grads
    for (std::size_t i = 0; i < n; ++i) {
      gw[i] = Eigen::MatrixXd(3, nq);
      for (std::size_t q = 0; q < nq; ++q)
        gw[i].col(q) = W * eval_hat(ghat[i], rule.points[q]);
    }
    agv.assign(nq, Eigen::VectorXd());
    for (std::size_t q = 0; q < nq; ++q) {
      Eigen::Vector3d gv = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < n; ++i) gv += c(i) * gw[i].col(q);
      agv[q] = A.eval(K.map(rule.points[q])) * gv;
    }
    gw_all.resize(n * nq);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t q = 0; q < nq; ++q) gw_all[i * nq + q] = gw[i].col(q);
  };

  std::vector<Eigen::VectorXd> gw_low, agv_low, gw_ref, agv_ref;
  accumulate(low, gw_low, agv_low);
  accumulate(ref, gw_ref, agv_ref);

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> tl(low.points.size()), tr(ref.points.size());
    for (std::size_t q = 0; q < low.points.size(); ++q)
      tl[q] = low.weights[q] * agv_low[q].dot(gw_low[i * low.points.size() + q]);
    for (std::size_t q = 0; q < ref.points.size(); ++q)
      tr[q] = ref.weights[q] * agv_ref[q].dot(gw_ref[i * ref.points.size() + q]);
    double err = dj * (pairwise_sum(std::move(tl)) - pairwise_sum(std::move(tr)));

    RationalPoly sq = conf.basis[i].comp[0] * conf.basis[i].comp[0];
    double norm = std::sqrt(dj * to_double(sq.integrate_reference()));
    worst = std::max(worst, std::abs(err) / norm);
  }
  return worst;
}

}  // namespace pyrafem
