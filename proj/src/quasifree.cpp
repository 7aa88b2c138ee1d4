#include "harvest/quasifree.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "harvest/errors.hpp"

namespace harvest {

Eigen::MatrixXd spatial_operator(const LatticeSpec& lat, const FieldOperatorSpec& op) {
  const int n = lat.n_space;
  const double k = 1.0 / (lat.dx * lat.dx);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    K(j, j) = 2.0 * k + op.mass * op.mass + op.potential_at(j);
    K(j, (j + 1) % n) -= k;
    K(j, (j + n - 1) % n) -= k;
  }
  return K;
}

QuasiFreeState build_state(const LatticeSpec& lat, const FieldOperatorSpec& op, StateKind kind,
                           double temperature, PhaseModel phase) {
  lat.validate();
  check_stability(lat, op);
  if (kind == StateKind::thermal && !(temperature > 0.0))
    throw Error(Errc::precondition, "thermal state needs a positive temperature");
  QuasiFreeState s;
  s.lattice = lat;
  s.op = op;
  s.kind = kind;
  s.temperature = temperature;
  s.phase = phase;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spatial_operator(lat, op));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = 4.0 / (lat.dx * lat.dx);
  if (ev.minCoeff() <= 1e-12 * scale) {
    std::ostringstream os;
    os << "spatial operator has eigenvalue " << ev.minCoeff()
       << "; use a positive mass or a confining potential";
    throw Error(Errc::infrared, os.str());
  }
  const int n = lat.n_space;
  s.omega = ev.array().sqrt();
  s.modes = es.eigenvectors() / std::sqrt(lat.dx);
  s.frequency.resize(n);
  s.comm_weight.resize(n);
  s.sym_weight.resize(n);
  for (int i = 0; i < n; ++i) {
    const double w = s.omega(i);
    if (phase == PhaseModel::lattice) {
      const double wt = 2.0 / lat.dt * std::asin(0.5 * w * lat.dt);
      s.frequency(i) = wt;
      s.comm_weight(i) = lat.dt / (2.0 * std::sin(wt * lat.dt));
    } else {
      s.frequency(i) = w;
      s.comm_weight(i) = 1.0 / (2.0 * w);
    }
    double therm = 1.0;
    if (kind == StateKind::thermal) therm = 1.0 / std::tanh(s.frequency(i) / (2.0 * temperature));
    s.sym_weight(i) = s.comm_weight(i) * therm;
  }
  return s;
}

Eigen::VectorXcd mode_amplitudes(const QuasiFreeState& s, const Field& f) {
  const LatticeSpec& lat = s.lattice;
  if (f.n_time() != lat.n_time || f.n_space() != lat.n_space)
    throw Error(Errc::lattice_mismatch, "test function does not match the state's lattice");
  const int nx = lat.n_space;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(nx);
  Eigen::VectorXd proj(nx);
  for (int n = 0; n < lat.n_time; ++n) {
    Eigen::Map<const Eigen::VectorXd> row(f.row(n), nx);
    if (row.cwiseAbs().maxCoeff() == 0.0) continue;
    proj.noalias() = s.modes.transpose() * row;
    const double t = lat.time_at(n);
    for (int i = 0; i < nx; ++i) out(i) += std::polar(proj(i), s.frequency(i) * t);
  }
  return out * (lat.dx * lat.dt);
}

double beta_from_amplitudes(const QuasiFreeState& s, const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) acc += s.sym_weight(i) * std::real(std::conj(f(i)) * g(i));
  return 2.0 * acc;
}

double commutator_from_amplitudes(const QuasiFreeState& s, const Eigen::VectorXcd& f,
                                  const Eigen::VectorXcd& g) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) acc += s.comm_weight(i) * std::imag(std::conj(f(i)) * g(i));
  return 2.0 * acc;
}

double beta_pair(const QuasiFreeState& s, const Field& f, const Field& g) {
  if (s.kind == StateKind::explicit_form) return s.explicit_beta(f, g);
  return beta_from_amplitudes(s, mode_amplitudes(s, f), mode_amplitudes(s, g));
}

double mode_commutator(const QuasiFreeState& s, const Field& f, const Field& g) {
  return commutator_from_amplitudes(s, mode_amplitudes(s, f), mode_amplitudes(s, g));
}

double one_point(const QuasiFreeState& s, const Field& f) { return s.chi ? s.chi(f) : 0.0; }

CovarianceOneMode restrict_covariance(const QuasiFreeState& s, const ModePair& mode, double tol) {
  CovarianceOneMode c;
  if (s.kind == StateKind::explicit_form) {
    c.A << s.explicit_beta(mode.f1, mode.f1), s.explicit_beta(mode.f1, mode.f2),
        s.explicit_beta(mode.f2, mode.f1), s.explicit_beta(mode.f2, mode.f2);
  } else {
    const Eigen::VectorXcd a = mode_amplitudes(s, mode.f1);
    const Eigen::VectorXcd b = mode_amplitudes(s, mode.f2);
    const double off = beta_from_amplitudes(s, a, b);
    c.A << beta_from_amplitudes(s, a, a), off, off, beta_from_amplitudes(s, b, b);
  }
  c.chi << one_point(s, mode.f1), one_point(s, mode.f2);
  if (!check_uncertainty(c, tol)) {
    std::ostringstream os;
    os << "restricted covariance violates the uncertainty relation (margin "
       << uncertainty_margin(c.A) << ")";
    throw Error(Errc::inconsistent_covariance, os.str());
  }
  return c;
}

PositivityReport validate_positivity(const QuasiFreeState& s, int sample_count, std::uint64_t seed,
                                     double tol, double beta_scale) {
  const LatticeSpec& lat = s.lattice;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rt_lo = 4.0 * lat.dt, rt_hi = std::max(rt_lo, 0.1 * lat.duration());
  const double rx_lo = 4.0 * lat.dx, rx_hi = std::max(rx_lo, 0.15 * lat.length());
  const double t_lo = 3.0 * lat.dt, t_hi = lat.time_at(lat.n_time - 4);
  auto draw = [&](double tc_hint, double xc_hint) {
    BumpParams p;
    p.rt = rt_lo + (rt_hi - rt_lo) * unit(rng);
    p.rx = rx_lo + (rx_hi - rx_lo) * unit(rng);
    p.t = tc_hint < 0 ? t_lo + p.rt + (t_hi - t_lo - 2.0 * p.rt) * unit(rng)
                      : std::clamp(tc_hint + (2.0 * unit(rng) - 1.0) * p.rt, t_lo + p.rt, t_hi - p.rt);
    p.x = xc_hint < 0 ? lat.length() * unit(rng) : xc_hint + (2.0 * unit(rng) - 1.0) * p.rx;
    p.amplitude = 1.0;
    return p;
  };
  PositivityReport rep;
  rep.samples = sample_count;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < sample_count; ++k) {
    const BumpParams pf = draw(-1.0, -1.0);
    const BumpParams pg = draw(pf.t, pf.x);
    const Field f = make_bump(lat, pf).values;
    const Field g = make_bump(lat, pg).values;
    const double bff = beta_scale * beta_pair(s, f, f);
    const double bgg = beta_scale * beta_pair(s, g, g);
    const double e = mode_commutator(s, f, g);
    const double v = (e * e - bff * bgg) / (bff * bgg);
    rep.max_violation = std::max(rep.max_violation, v);
  }
  rep.passed = rep.max_violation <= tol;
  return rep;
}

}  // namespace harvest
