#include "harvest/symplectic.hpp"

#include <algorithm>
#include <cmath>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

constexpr double kSymmetryTol = 1e-9;

template <typename M>
void require_symmetric(const M& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw Error(Errc::malformed_matrix, "covariance matrix is not symmetric");
}

template <int N>
double min_eig_plus_i(const Eigen::Matrix<double, N, N>& g,
                      const Eigen::Matrix<double, N, N>& omega) {
  using C = Eigen::Matrix<std::complex<double>, N, N>;
  C h = g.template cast<std::complex<double>>();
  h += std::complex<double>(0.0, 1.0) * omega.template cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<C> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Mat2 symplectic_unit() {
  Mat2 s;
  s << 0.0, 1.0, -1.0, 0.0;
  return s;
}

Mat4 symplectic_form() {
  Mat4 o = Mat4::Zero();
  o.topLeftCorner<2, 2>() = symplectic_unit();
  o.bottomRightCorner<2, 2>() = symplectic_unit();
  return o;
}

CovarianceTwoMode CovarianceTwoMode::from_blocks(const Mat2& A, const Mat2& B, const Mat2& C) {
  CovarianceTwoMode c;
  c.gamma.topLeftCorner<2, 2>() = A;
  c.gamma.bottomRightCorner<2, 2>() = B;
  c.gamma.topRightCorner<2, 2>() = C;
  c.gamma.bottomLeftCorner<2, 2>() = C.transpose();
  return c;
}

double GaussianPRepresentation::density(const Vec4& alpha) const {
  if (rank_deficient) throw Error(Errc::precondition, "rank-deficient P-function has no density");
  const Vec4 d = alpha - shift;
  return normalization * std::exp(-0.5 * d.dot(precision_matrix * d));
}

double uncertainty_margin(const Mat4& gamma) {
  require_symmetric(gamma);
  return min_eig_plus_i<4>(gamma, symplectic_form());
}

double uncertainty_margin(const Mat2& A) {
  require_symmetric(A);
  return min_eig_plus_i<2>(A, symplectic_unit());
}

bool check_uncertainty(const CovarianceOneMode& c, double tol) {
  return uncertainty_margin(c.A) >= -tol;
}

bool check_uncertainty(const CovarianceTwoMode& c, double tol) {
  return uncertainty_margin(c.gamma) >= -tol;
}

bool is_pure_mode(const CovarianceOneMode& c, double tol) {
  if (!check_uncertainty(c, tol))
    throw Error(Errc::precondition, "covariance violates the uncertainty relation");
  return std::abs(c.A.determinant() - 1.0) <= tol;
}

double mode_number_expectation(const CovarianceOneMode& c) {
  return 0.5 * (0.5 * c.A.trace() - 1.0 + c.chi.squaredNorm());
}

double trace_term(const Mat2& A, const Mat2& B, const Mat2& C) {
  const Mat2 s = symplectic_unit();
  return (A * s * C * s * B * s * C.transpose() * s).trace();
}

double simon_value(const Mat2& A, const Mat2& B, const Mat2& C) {
  const double da = A.determinant(), db = B.determinant(), dc = C.determinant();
  // Same polynomial, grouped so near-pure blocks do not cancel.
  return -(da - 1.0) * (db - 1.0) + trace_term(A, B, C) - 2.0 * dc - dc * dc;
}

double simon_value(const CovarianceTwoMode& c) { return simon_value(c.A(), c.B(), c.C()); }

double simon_tilde(const CovarianceTwoMode& c) {
  const Mat2 A = c.A(), B = c.B(), C = c.C();
  const double da = A.determinant(), db = B.determinant(), dc = C.determinant();
  return -(da - 1.0) * (db - 1.0) + trace_term(A, B, C) + 2.0 * dc - dc * dc;
}

double nu_minus(const CovarianceTwoMode& c, double tol) {
  const Mat2 A = c.A(), B = c.B(), C = c.C();
  const double da = A.determinant(), db = B.determinant(), dc = C.determinant();
  const double delta = da + db - 2.0 * dc;
  const double i4 = da * db + dc * dc - trace_term(A, B, C);
  double disc = delta * delta - 4.0 * i4;
  if (disc < -tol * std::max(1.0, delta * delta))
    throw Error(Errc::inconsistent_covariance, "negative discriminant in symplectic spectrum");
  disc = std::max(disc, 0.0);
  // Rationalised form avoids cancellation when nu_- is small.
  const double big = 0.5 * (delta + std::sqrt(disc));
  if (big <= 0.0) return 0.0;
  return std::sqrt(std::max(i4, 0.0) / big);
}

double negativity_from_nu(double nu) {
  if (nu <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, (1.0 - nu) / (2.0 * nu));
}

double negativity(const CovarianceTwoMode& c, double tol) {
  return negativity_from_nu(nu_minus(c, tol));
}

CovarianceTwoMode partial_transpose(const CovarianceTwoMode& c) {
  CovarianceTwoMode out = c;
  out.gamma.row(3) *= -1.0;
  out.gamma.col(3) *= -1.0;
  out.chi(3) = -out.chi(3);
  return out;
}

std::optional<GaussianPRepresentation> p_function_witness(const CovarianceTwoMode& c, double tol) {
  require_symmetric(c.gamma);
  const Mat4 shifted = c.gamma - Mat4::Identity();
  Eigen::SelfAdjointEigenSolver<Mat4> es(shifted, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -tol) return std::nullopt;
  GaussianPRepresentation rep;
  rep.shift = c.chi;
  if (lo <= tol) {
    rep.rank_deficient = true;
    return rep;
  }
  rep.precision_matrix = (0.5 * shifted).inverse();
  rep.normalization = 1.0 / (M_PI * M_PI * std::sqrt(shifted.determinant()));
  return rep;
}

std::complex<double> weyl_expectation(const Mat4& gamma, const Vec4& chi, const Vec4& xi) {
  return std::exp(std::complex<double>(-0.25 * xi.dot(gamma * xi), chi.dot(xi)));
}

}  // namespace harvest
