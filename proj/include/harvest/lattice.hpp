#pragma once

#include <array>
#include <vector>

namespace harvest {

/// Periodic spatial circle of n_space sites times n_time slices.
struct LatticeSpec {
  int n_space = 128;
  int n_time = 256;
  double dx = 0.1;
  double dt = 0.09;

  void validate() const;
  double length() const { return n_space * dx; }
  double duration() const { return n_time * dt; }
  double time_at(int n) const { return n * dt; }
  double x_at(int j) const { return j * dx; }
  bool operator==(const LatticeSpec&) const = default;
};

/// Box-Cauchy -Laplacian + m^2 + chi(x).  An empty potential means zero.
struct FieldOperatorSpec {
  double mass = 1.0;
  std::vector<double> potential;

  double potential_at(int j) const { return potential.empty() ? 0.0 : potential[j]; }
  double max_potential() const;
};

/// Row-major (time, space) samples.
class Field {
 public:
  Field() = default;
  explicit Field(const LatticeSpec& lat) : nt_(lat.n_time), nx_(lat.n_space), v_(nt_ * nx_, 0.0) {}
  Field(int nt, int nx) : nt_(nt), nx_(nx), v_(static_cast<size_t>(nt) * nx, 0.0) {}

  int n_time() const { return nt_; }
  int n_space() const { return nx_; }
  double& operator()(int n, int j) { return v_[static_cast<size_t>(n) * nx_ + j]; }
  double operator()(int n, int j) const { return v_[static_cast<size_t>(n) * nx_ + j]; }
  double* row(int n) { return v_.data() + static_cast<size_t>(n) * nx_; }
  const double* row(int n) const { return v_.data() + static_cast<size_t>(n) * nx_; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  double max_abs() const;
  bool is_zero() const;
  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  /// Pointwise product.
  Field times(const Field& o) const;

 private:
  int nt_ = 0;
  int nx_ = 0;
  std::vector<double> v_;
};

/// Index rectangle; spatial range may wrap around the circle.
struct SupportBox {
  int n0 = 0, n1 = -1;
  int j0 = 0, width = 0;
  bool empty() const { return n1 < n0 || width <= 0; }
  bool contains(int n, int j, int n_space) const;
};

struct TestFunction {
  Field values;
  SupportBox box;
};

struct BumpParams {
  double t = 0.0, x = 0.0, rt = 1.0, rx = 1.0, amplitude = 1.0;
  bool operator==(const BumpParams&) const = default;
};

/// (system, probe_a, probe_b)
using TripleFunction = std::array<Field, 3>;
enum Slot { kSystem = 0, kProbeA = 1, kProbeB = 2 };

enum class Direction { retarded, advanced };

/// Product of exp(-1/(1-u^2)) profiles in t and x, exactly zero for |u| >= 1.
TestFunction make_bump(const LatticeSpec& lat, const BumpParams& p);
/// Envelope bump times cos(omega (t - t_c) + phase).
TestFunction make_carrier(const LatticeSpec& lat, const BumpParams& p, double omega, double phase);

/// Bounding box of the nonzero samples (minimal circular arc in space).
SupportBox support_of(const Field& f);
bool inside_time_domain(const LatticeSpec& lat, const SupportBox& b);

/// Largest stable step for the leapfrog with this operator and extra potential bound.
double max_stable_dt(const LatticeSpec& lat, const FieldOperatorSpec& op, double extra = 0.0);
void check_stability(const LatticeSpec& lat, const FieldOperatorSpec& op, double extra = 0.0);

Field green_apply(const LatticeSpec& lat, const FieldOperatorSpec& op, Direction dir, const Field& f);
/// Max interior |P u - f| with P discretised at fourth order; a measure of the truncation error.
double green_residual(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& u, const Field& f);

double pairing(const LatticeSpec& lat, const Field& f, const Field& g);

/// Sign of E relative to (advanced - retarded); kept in one place.
inline constexpr double kCausalSign = 1.0;
/// E g = kCausalSign * (advanced - retarded) g.
Field causal_apply(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& g);
double causal_pairing(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& f, const Field& g);

struct ModePair {
  Field f1, f2;
};

ModePair normalize_mode(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& f1,
                        const Field& f2, double tol = 1e-12);

/// Free operators and coupling profiles of the three-field system.
struct CoupledSystem {
  LatticeSpec lattice;
  std::array<FieldOperatorSpec, 3> ops;
  Field rho_a, rho_b;

  /// Gershgorin bound on the coupling block at strength lambda.
  double coupling_bound(double lambda) const;
  void check_stability(double lambda) const;
};

TripleFunction coupled_apply(const CoupledSystem& sys, double lambda, Direction dir,
                             const TripleFunction& g);
inline TripleFunction coupled_advanced_apply(const CoupledSystem& sys, double lambda,
                                             const TripleFunction& g) {
  return coupled_apply(sys, lambda, Direction::advanced, g);
}
/// Coupling block (off-diagonal rho multiplication) times u.
TripleFunction coupling_times(const CoupledSystem& sys, double lambda, const TripleFunction& u);

TripleFunction theta_apply(const CoupledSystem& sys, double lambda, const TripleFunction& g);
/// Coefficients of lambda^0..lambda^order of theta g.
std::vector<TripleFunction> born_theta_terms(const CoupledSystem& sys, const TripleFunction& g,
                                             int order = 4);
TripleFunction born_sum(const std::vector<TripleFunction>& terms, double lambda);

/// Discrete causal cone |dj| <= |dn| widened by kHalo cells.
inline constexpr int kHalo = 2;
using Mask = std::vector<char>;
Mask causal_future(const LatticeSpec& lat, const Field& f);
Mask causal_past(const LatticeSpec& lat, const Field& f);
bool mask_hits(const Mask& m, const Field& f);
double max_outside(const Mask& m, const Field& f);

/// Cells outside J^+ and J^- of every given field.
Mask causal_complement(const LatticeSpec& lat, const std::vector<const Field*>& fs);

TripleFunction zero_triple(const LatticeSpec& lat);
TripleFunction in_slot(const LatticeSpec& lat, int slot, const Field& f);
double triple_max_abs(const TripleFunction& t);

}  // namespace harvest
