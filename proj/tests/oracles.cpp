#include "oracles.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

Rule gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(std::sqrt(M_PI) * v * v);
  }
  return r;
}

std::complex<double> p_quadrature(const harvest::GaussianPRepresentation& rep, const harvest::Vec4& xi,
                                  const Rule& rule) {
  // alpha = shift + sqrt(2) L z with L L^T the covariance of P.
  const harvest::Mat4 cov = rep.precision_matrix.inverse();
  const harvest::Mat4 L = cov.llt().matrixL();
  const harvest::Mat4 M = std::sqrt(2.0) * L;
  const double jac = M.determinant();
  const int n = static_cast<int>(rule.nodes.size());
  std::complex<double> acc = 0.0;
  harvest::Vec4 z;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          z << rule.nodes[a], rule.nodes[b], rule.nodes[c], rule.nodes[d];
          const double w = rule.weights[a] * rule.weights[b] * rule.weights[c] * rule.weights[d];
          const harvest::Vec4 alpha = rep.shift + M * z;
          const double p = rep.density(alpha) * std::exp(z.squaredNorm());
          acc += w * p * harvest::weyl_expectation(harvest::Mat4::Identity(), alpha, xi);
        }
  return acc * jac;
}

namespace {

double profile(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

/// Integral of the spatial profile from -inf to z.
double cumulative(double z, double x0, double rx) {
  const double lo = x0 - rx;
  if (z <= lo) return 0.0;
  const double hi = std::min(z, x0 + rx);
  auto f = [&](double y) { return profile((y - x0) / rx); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 8, 1e-14);
}

}  // namespace

double massless_retarded(double t, double x, double t0, double x0, double rt, double rx, double amplitude) {
  const double lo = t0 - rt, hi = std::min(t, t0 + rt);
  if (hi <= lo) return 0.0;
  auto g = [&](double s) {
    const double tau = t - s;
    return profile((s - t0) / rt) * (cumulative(x + tau, x0, rx) - cumulative(x - tau, x0, rx));
  };
  return 0.5 * amplitude * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 8, 1e-13);
}

}  // namespace oracle
