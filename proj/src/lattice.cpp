#include "harvest/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harvest/errors.hpp"

namespace harvest {

void LatticeSpec::validate() const {
  if (n_space < 8) throw Error(Errc::geometry, "n_space must be at least 8");
  if (n_time < 8) throw Error(Errc::geometry, "n_time must be at least 8");
  if (!(dx > 0.0) || !(dt > 0.0)) throw Error(Errc::geometry, "dx and dt must be positive");
  if (dt / dx > 1.0 - 1e-12) {
    std::ostringstream os;
    os << "dt/dx = " << dt / dx << " violates the CFL bound dt/dx < 1";
    throw Error(Errc::stability, os.str());
  }
}

double FieldOperatorSpec::max_potential() const {
  if (potential.empty()) return 0.0;
  return *std::max_element(potential.begin(), potential.end());
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

bool Field::is_zero() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; });
}

Field& Field::operator+=(const Field& o) {
  if (o.nt_ != nt_ || o.nx_ != nx_) throw Error(Errc::lattice_mismatch, "field shapes differ");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  if (o.nt_ != nt_ || o.nx_ != nx_) throw Error(Errc::lattice_mismatch, "field shapes differ");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& x : v_) x *= a;
  return *this;
}

Field Field::times(const Field& o) const {
  if (o.nt_ != nt_ || o.nx_ != nx_) throw Error(Errc::lattice_mismatch, "field shapes differ");
  Field r(nt_, nx_);
  for (size_t i = 0; i < v_.size(); ++i) r.v_[i] = v_[i] * o.v_[i];
  return r;
}

bool SupportBox::contains(int n, int j, int n_space) const {
  if (empty() || n < n0 || n > n1) return false;
  const int off = ((j - j0) % n_space + n_space) % n_space;
  return off < width;
}

namespace {

double profile(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double periodic_offset(double x, double c, double L) {
  double d = std::fmod(x - c + 0.5 * L, L);
  if (d < 0) d += L;
  return d - 0.5 * L;
}

void check_same(const Field& a, const Field& b) {
  if (a.n_time() != b.n_time() || a.n_space() != b.n_space())
    throw Error(Errc::lattice_mismatch, "fields live on different lattices");
}

void check_on(const LatticeSpec& lat, const Field& f) {
  if (f.n_time() != lat.n_time || f.n_space() != lat.n_space)
    throw Error(Errc::lattice_mismatch, "field does not match the lattice");
}

void laplacian_row(const double* u, double* out, int nx, double inv_dx2) {
  for (int j = 0; j < nx; ++j) {
    const int jm = j == 0 ? nx - 1 : j - 1;
    const int jp = j == nx - 1 ? 0 : j + 1;
    out[j] = (u[jm] + u[jp] - 2.0 * u[j]) * inv_dx2;
  }
}

}  // namespace

TestFunction make_bump(const LatticeSpec& lat, const BumpParams& p) {
  lat.validate();
  if (!(p.rt > 0.0) || !(p.rx > 0.0)) throw Error(Errc::geometry, "bump radii must be positive");
  if (2.0 * p.rx >= lat.length()) throw Error(Errc::geometry, "bump wider than the spatial circle");
  if (p.t - p.rt < 0.0 || p.t + p.rt > lat.time_at(lat.n_time - 1))
    throw Error(Errc::geometry, "bump time box leaves the lattice time window");
  TestFunction out{Field(lat), {}};
  std::vector<double> fx(lat.n_space);
  for (int j = 0; j < lat.n_space; ++j)
    fx[j] = profile(periodic_offset(lat.x_at(j), p.x, lat.length()) / p.rx);
  for (int n = 0; n < lat.n_time; ++n) {
    const double ft = profile((lat.time_at(n) - p.t) / p.rt);
    if (ft == 0.0) continue;
    double* r = out.values.row(n);
    for (int j = 0; j < lat.n_space; ++j) r[j] = p.amplitude * ft * fx[j];
  }
  out.box = support_of(out.values);
  if (!out.box.empty() && !inside_time_domain(lat, out.box))
    throw Error(Errc::geometry, "bump support touches the first or last two time slices");
  return out;
}

TestFunction make_carrier(const LatticeSpec& lat, const BumpParams& p, double omega, double phase) {
  TestFunction out = make_bump(lat, p);
  for (int n = 0; n < lat.n_time; ++n) {
    const double c = std::cos(omega * (lat.time_at(n) - p.t) + phase);
    double* r = out.values.row(n);
    for (int j = 0; j < lat.n_space; ++j) r[j] *= c;
  }
  return out;
}

SupportBox support_of(const Field& f) {
  SupportBox b;
  const int nt = f.n_time(), nx = f.n_space();
  std::vector<char> col(nx, 0);
  int n0 = nt, n1 = -1;
  for (int n = 0; n < nt; ++n) {
    const double* r = f.row(n);
    bool any = false;
    for (int j = 0; j < nx; ++j)
      if (r[j] != 0.0) col[j] = 1, any = true;
    if (any) n0 = std::min(n0, n), n1 = n;
  }
  if (n1 < 0) return b;
  b.n0 = n0;
  b.n1 = n1;
  // The complement of the longest empty circular run is the minimal covering arc.
  int best_len = 0, best_start = 0;
  for (int s = 0; s < nx; ++s) {
    if (col[s] || !col[(s + nx - 1) % nx]) continue;
    int len = 0;
    while (len < nx && !col[(s + len) % nx]) ++len;
    if (len > best_len) best_len = len, best_start = s;
  }
  b.j0 = (best_start + best_len) % nx;
  b.width = nx - best_len;
  return b;
}

bool inside_time_domain(const LatticeSpec& lat, const SupportBox& b) {
  return b.empty() || (b.n0 >= 2 && b.n1 <= lat.n_time - 3);
}

double max_stable_dt(const LatticeSpec& lat, const FieldOperatorSpec& op, double extra) {
  const double w2 = 4.0 / (lat.dx * lat.dx) + op.mass * op.mass + op.max_potential() + extra;
  return 2.0 / std::sqrt(w2);
}

void check_stability(const LatticeSpec& lat, const FieldOperatorSpec& op, double extra) {
  lat.validate();
  const double lim = max_stable_dt(lat, op, extra);
  if (lat.dt >= lim) {
    std::ostringstream os;
    os << "dt = " << lat.dt << " exceeds the leapfrog stability limit " << lim
       << " for mass " << op.mass;
    throw Error(Errc::stability, os.str());
  }
}

Field green_apply(const LatticeSpec& lat, const FieldOperatorSpec& op, Direction dir, const Field& f) {
  check_on(lat, f);
  check_stability(lat, op);
  const int nt = lat.n_time, nx = lat.n_space;
  const double dt2 = lat.dt * lat.dt, inv_dx2 = 1.0 / (lat.dx * lat.dx);
  std::vector<double> m2(nx);
  for (int j = 0; j < nx; ++j) m2[j] = op.mass * op.mass + op.potential_at(j);
  Field u(lat);
  std::vector<double> lap(nx);
  auto step = [&](int from, int prev, int to) {
    const double* uc = u.row(from);
    const double* up = u.row(prev);
    const double* fc = f.row(from);
    double* un = u.row(to);
    laplacian_row(uc, lap.data(), nx, inv_dx2);
    for (int j = 0; j < nx; ++j) un[j] = 2.0 * uc[j] - up[j] + dt2 * (lap[j] - m2[j] * uc[j] + fc[j]);
  };
  if (dir == Direction::retarded) {
    for (int n = 1; n < nt - 1; ++n) step(n, n - 1, n + 1);
  } else {
    for (int n = nt - 2; n > 0; --n) step(n, n + 1, n - 1);
  }
  return u;
}

double green_residual(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& u, const Field& f) {
  check_on(lat, u);
  check_on(lat, f);
  const int nt = lat.n_time, nx = lat.n_space;
  const double it = 1.0 / (12.0 * lat.dt * lat.dt), ix = 1.0 / (12.0 * lat.dx * lat.dx);
  double worst = 0.0;
  for (int n = 2; n < nt - 2; ++n) {
    for (int j = 0; j < nx; ++j) {
      auto at = [&](int dn, int dj) { return u(n + dn, ((j + dj) % nx + nx) % nx); };
      const double utt = (-at(2, 0) + 16.0 * at(1, 0) - 30.0 * at(0, 0) + 16.0 * at(-1, 0) - at(-2, 0)) * it;
      const double uxx = (-at(0, 2) + 16.0 * at(0, 1) - 30.0 * at(0, 0) + 16.0 * at(0, -1) - at(0, -2)) * ix;
      const double m2 = op.mass * op.mass + op.potential_at(j);
      worst = std::max(worst, std::abs(utt - uxx + m2 * at(0, 0) - f(n, j)));
    }
  }
  return worst;
}

double pairing(const LatticeSpec& lat, const Field& f, const Field& g) {
  check_on(lat, f);
  check_same(f, g);
  double s = 0.0;
  const auto& a = f.data();
  const auto& b = g.data();
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * lat.dx * lat.dt;
}

Field causal_apply(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& g) {
  Field e = green_apply(lat, op, Direction::advanced, g);
  e -= green_apply(lat, op, Direction::retarded, g);
  if (kCausalSign != 1.0) e *= kCausalSign;
  return e;
}

double causal_pairing(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& f, const Field& g) {
  return pairing(lat, f, causal_apply(lat, op, g));
}

ModePair normalize_mode(const LatticeSpec& lat, const FieldOperatorSpec& op, const Field& f1,
                        const Field& f2, double tol) {
  const double e = causal_pairing(lat, op, f1, f2);
  if (!(std::abs(e) > tol)) {
    std::ostringstream os;
    os << "E(f1, f2) = " << e << " does not define a mode";
    throw Error(Errc::degenerate_mode, os.str());
  }
  return {f1, (1.0 / e) * f2};
}

double CoupledSystem::coupling_bound(double lambda) const {
  return std::abs(lambda) * (rho_a.max_abs() + rho_b.max_abs());
}

void CoupledSystem::check_stability(double lambda) const {
  const double extra = coupling_bound(lambda);
  for (const auto& op : ops) harvest::check_stability(lattice, op, extra);
}

TripleFunction coupled_apply(const CoupledSystem& sys, double lambda, Direction dir,
                             const TripleFunction& g) {
  const LatticeSpec& lat = sys.lattice;
  for (const auto& c : g) check_on(lat, c);
  check_on(lat, sys.rho_a);
  check_on(lat, sys.rho_b);
  sys.check_stability(lambda);
  const int nt = lat.n_time, nx = lat.n_space;
  const double dt2 = lat.dt * lat.dt, inv_dx2 = 1.0 / (lat.dx * lat.dx);
  std::array<std::vector<double>, 3> m2;
  for (int c = 0; c < 3; ++c) {
    m2[c].resize(nx);
    for (int j = 0; j < nx; ++j) m2[c][j] = sys.ops[c].mass * sys.ops[c].mass + sys.ops[c].potential_at(j);
  }
  TripleFunction u = zero_triple(lat);
  std::vector<double> lap(nx);
  auto step = [&](int from, int prev, int to) {
    const double* ra = sys.rho_a.row(from);
    const double* rb = sys.rho_b.row(from);
    const double* us = u[kSystem].row(from);
    const double* ua = u[kProbeA].row(from);
    const double* ub = u[kProbeB].row(from);
    for (int c = 0; c < 3; ++c) {
      const double* uc = u[c].row(from);
      const double* up = u[c].row(prev);
      const double* gc = g[c].row(from);
      double* un = u[c].row(to);
      laplacian_row(uc, lap.data(), nx, inv_dx2);
      for (int j = 0; j < nx; ++j) {
        double v;
        if (c == kSystem) v = ra[j] * ua[j] + rb[j] * ub[j];
        else if (c == kProbeA) v = ra[j] * us[j];
        else v = rb[j] * us[j];
        un[j] = 2.0 * uc[j] - up[j] + dt2 * (lap[j] - m2[c][j] * uc[j] - lambda * v + gc[j]);
      }
    }
  };
  if (dir == Direction::retarded) {
    for (int n = 1; n < nt - 1; ++n) step(n, n - 1, n + 1);
  } else {
    for (int n = nt - 2; n > 0; --n) step(n, n + 1, n - 1);
  }
  return u;
}

TripleFunction coupling_times(const CoupledSystem& sys, double lambda, const TripleFunction& u) {
  TripleFunction r;
  r[kSystem] = lambda * (sys.rho_a.times(u[kProbeA]) + sys.rho_b.times(u[kProbeB]));
  r[kProbeA] = lambda * sys.rho_a.times(u[kSystem]);
  r[kProbeB] = lambda * sys.rho_b.times(u[kSystem]);
  return r;
}

TripleFunction theta_apply(const CoupledSystem& sys, double lambda, const TripleFunction& g) {
  if (lambda == 0.0) return g;
  const TripleFunction v = coupling_times(sys, lambda, coupled_advanced_apply(sys, lambda, g));
  TripleFunction r = g;
  for (int c = 0; c < 3; ++c) r[c] -= v[c];
  return r;
}

std::vector<TripleFunction> born_theta_terms(const CoupledSystem& sys, const TripleFunction& g, int order) {
  std::vector<TripleFunction> terms{g};
  for (int k = 1; k <= order; ++k) {
    TripleFunction next = coupling_times(sys, -1.0, coupled_advanced_apply(sys, 0.0, terms.back()));
    terms.push_back(std::move(next));
  }
  return terms;
}

TripleFunction born_sum(const std::vector<TripleFunction>& terms, double lambda) {
  TripleFunction r = terms.front();
  double p = 1.0;
  for (size_t k = 1; k < terms.size(); ++k) {
    p *= lambda;
    for (int c = 0; c < 3; ++c) r[c] += p * terms[k][c];
  }
  return r;
}

namespace {

Mask nonzero_mask(const Field& f) {
  Mask m(f.data().size(), 0);
  for (size_t i = 0; i < m.size(); ++i) m[i] = f.data()[i] != 0.0;
  return m;
}

void dilate_row(const char* in, char* out, int nx, int r) {
  for (int j = 0; j < nx; ++j) {
    if (!in[j]) continue;
    for (int d = -r; d <= r; ++d) out[((j + d) % nx + nx) % nx] = 1;
  }
}

Mask cone(const LatticeSpec& lat, const Field& f, bool future) {
  check_on(lat, f);
  const int nt = lat.n_time, nx = lat.n_space;
  const Mask src = nonzero_mask(f);
  Mask reach(src.size(), 0);
  std::vector<char> cur(nx, 0), tmp(nx);
  for (int k = 0; k < nt; ++k) {
    const int n = future ? k : nt - 1 - k;
    std::fill(tmp.begin(), tmp.end(), 0);
    dilate_row(cur.data(), tmp.data(), nx, 1);
    for (int j = 0; j < nx; ++j) tmp[j] = tmp[j] || src[static_cast<size_t>(n) * nx + j];
    cur = tmp;
    dilate_row(cur.data(), &reach[static_cast<size_t>(n) * nx], nx, kHalo);
  }
  return reach;
}

}  // namespace

Mask causal_future(const LatticeSpec& lat, const Field& f) { return cone(lat, f, true); }
Mask causal_past(const LatticeSpec& lat, const Field& f) { return cone(lat, f, false); }

bool mask_hits(const Mask& m, const Field& f) {
  for (size_t i = 0; i < m.size(); ++i)
    if (m[i] && f.data()[i] != 0.0) return true;
  return false;
}

double max_outside(const Mask& m, const Field& f) {
  double worst = 0.0;
  for (size_t i = 0; i < m.size(); ++i)
    if (!m[i]) worst = std::max(worst, std::abs(f.data()[i]));
  return worst;
}

Mask causal_complement(const LatticeSpec& lat, const std::vector<const Field*>& fs) {
  Mask out(static_cast<size_t>(lat.n_time) * lat.n_space, 1);
  for (const Field* f : fs) {
    const Mask a = causal_future(lat, *f);
    const Mask b = causal_past(lat, *f);
    for (size_t i = 0; i < out.size(); ++i)
      if (a[i] || b[i]) out[i] = 0;
  }
  return out;
}

TripleFunction zero_triple(const LatticeSpec& lat) { return {Field(lat), Field(lat), Field(lat)}; }

TripleFunction in_slot(const LatticeSpec& lat, int slot, const Field& f) {
  TripleFunction t = zero_triple(lat);
  t[slot] = f;
  return t;
}

double triple_max_abs(const TripleFunction& t) {
  return std::max({t[0].max_abs(), t[1].max_abs(), t[2].max_abs()});
}

}  // namespace harvest
