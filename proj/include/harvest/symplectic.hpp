#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace harvest {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;

inline constexpr double kDefaultTol = 1e-10;

/// Symplectic unit s = [[0,1],[-1,0]].
Mat2 symplectic_unit();
/// Omega = s (+) s.
Mat4 symplectic_form();

struct CovarianceOneMode {
  Mat2 A = Mat2::Identity();
  Vec2 chi = Vec2::Zero();
};

struct CovarianceTwoMode {
  Mat4 gamma = Mat4::Identity();
  Vec4 chi = Vec4::Zero();

  Mat2 A() const { return gamma.topLeftCorner<2, 2>(); }
  Mat2 B() const { return gamma.bottomRightCorner<2, 2>(); }
  Mat2 C() const { return gamma.topRightCorner<2, 2>(); }

  static CovarianceTwoMode from_blocks(const Mat2& A, const Mat2& B, const Mat2& C);
};

/// Gaussian P-function of a state with gamma - 1 >= 0.
struct GaussianPRepresentation {
  double normalization = 0.0;
  Mat4 precision_matrix = Mat4::Zero();
  Vec4 shift = Vec4::Zero();
  bool rank_deficient = false;

  /// Density at phase-space point alpha; not available when rank deficient.
  double density(const Vec4& alpha) const;
};

bool check_uncertainty(const CovarianceOneMode& c, double tol = kDefaultTol);
bool check_uncertainty(const CovarianceTwoMode& c, double tol = kDefaultTol);
/// Smallest eigenvalue of gamma + i Omega.
double uncertainty_margin(const Mat4& gamma);
double uncertainty_margin(const Mat2& A);

bool is_pure_mode(const CovarianceOneMode& c, double tol = kDefaultTol);
double mode_number_expectation(const CovarianceOneMode& c);

/// Tr(A s C s B s C^T s).
double trace_term(const Mat2& A, const Mat2& B, const Mat2& C);
double simon_value(const Mat2& A, const Mat2& B, const Mat2& C);
double simon_value(const CovarianceTwoMode& c);
/// Simon polynomial with (1 - det C)^2; non-positive for every physical gamma.
double simon_tilde(const CovarianceTwoMode& c);

double nu_minus(const CovarianceTwoMode& c, double tol = kDefaultTol);
double negativity(const CovarianceTwoMode& c, double tol = kDefaultTol);
double negativity_from_nu(double nu);

CovarianceTwoMode partial_transpose(const CovarianceTwoMode& c);

std::optional<GaussianPRepresentation> p_function_witness(const CovarianceTwoMode& c,
                                                          double tol = kDefaultTol);

std::complex<double> weyl_expectation(const Mat4& gamma, const Vec4& chi, const Vec4& xi);

}  // namespace harvest
