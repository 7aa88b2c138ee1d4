#include "harvest/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

Mask merged(const Mask& a, const Mask& b) {
  Mask r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] || b[i];
  return r;
}

}  // namespace

bool HarvestScenario::zones_spacelike() const {
  const LatticeSpec& lat = lattice();
  const Mask cone_b = merged(causal_future(lat, coupled.rho_b), causal_past(lat, coupled.rho_b));
  return !mask_hits(cone_b, coupled.rho_a);
}

void HarvestScenario::validate_geometry() const {
  const LatticeSpec& lat = lattice();
  for (const Field* r : {&coupled.rho_a, &coupled.rho_b})
    if (!inside_time_domain(lat, support_of(*r)))
      throw Error(Errc::geometry, "coupling zone touches the time boundary");
  const Mask past = merged(causal_past(lat, coupled.rho_a), causal_past(lat, coupled.rho_b));
  const std::pair<const char*, const ModePair*> modes[] = {{"A", &mode_a}, {"B", &mode_b}};
  for (const auto& [name, m] : modes) {
    for (const Field* f : {&m->f1, &m->f2}) {
      if (!inside_time_domain(lat, support_of(*f)))
        throw Error(Errc::geometry, std::string("mode ") + name + " touches the time boundary");
      if (mask_hits(past, *f))
        throw Error(Errc::causal_geometry,
                    std::string("mode ") + name + " reaches into the causal past of a coupling zone");
    }
  }
}

std::array<TripleFunction, 4> scattered_modes(const HarvestScenario& sc, double lambda) {
  const LatticeSpec& lat = sc.lattice();
  const Field* src[4] = {&sc.mode_a.f1, &sc.mode_a.f2, &sc.mode_b.f1, &sc.mode_b.f2};
  std::array<TripleFunction, 4> out;
  for (int k = 0; k < 4; ++k)
    out[k] = theta_apply(sc.coupled, lambda, in_slot(lat, k < 2 ? kProbeA : kProbeB, *src[k]));
  return out;
}

CovarianceTwoMode blocks_from_images(const HarvestScenario& sc, const std::array<TripleFunction, 4>& F,
                                     const std::array<bool, 3>& use_slot) {
  CovarianceTwoMode g;
  g.gamma.setZero();
  g.chi.setZero();
  for (int l = 0; l < 3; ++l) {
    if (!use_slot[l]) continue;
    const QuasiFreeState& st = sc.states[l];
    std::array<Eigen::VectorXcd, 4> hat;
    std::array<bool, 4> live{};
    for (int k = 0; k < 4; ++k) {
      live[k] = !F[k][l].is_zero();
      if (live[k]) {
        if (st.kind != StateKind::explicit_form) hat[k] = mode_amplitudes(st, F[k][l]);
        g.chi(k) += one_point(st, F[k][l]);
      }
    }
    for (int j = 0; j < 4; ++j) {
      for (int k = j; k < 4; ++k) {
        if (!live[j] || !live[k]) continue;
        const double b = st.kind == StateKind::explicit_form ? st.explicit_beta(F[j][l], F[k][l])
                                                             : beta_from_amplitudes(st, hat[j], hat[k]);
        g.gamma(j, k) += b;
        if (j != k) g.gamma(k, j) += b;
      }
    }
  }
  return g;
}

CovarianceTwoMode assemble_blocks(const HarvestScenario& sc, double lambda, double tol) {
  const CovarianceTwoMode g = blocks_from_images(sc, scattered_modes(sc, lambda));
  const double margin = uncertainty_margin(g.gamma);
  if (margin < -tol) {
    std::ostringstream os;
    os << "assembled covariance at lambda = " << lambda << " violates the uncertainty relation by "
       << -margin << "; refine the lattice";
    throw Error(Errc::solver_resolution, os.str());
  }
  return g;
}

SweepRow make_row(double lambda, const CovarianceTwoMode& g) {
  SweepRow r;
  r.lambda = lambda;
  const Mat2 A = g.A(), B = g.B(), C = g.C();
  r.p_s = simon_value(A, B, C);
  r.nu_minus = nu_minus(g);
  r.negativity = negativity_from_nu(r.nu_minus);
  r.det_a = A.determinant();
  r.det_b = B.determinant();
  r.det_c = C.determinant();
  r.trace_term = trace_term(A, B, C);
  return r;
}

std::vector<SweepRow> sweep(const HarvestScenario& sc, const std::vector<double>& grid) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double l : grid) rows.push_back(make_row(l, assemble_blocks(sc, l)));
  return rows;
}

std::vector<SweepRow> sweep(const HarvestScenario& sc) { return sweep(sc, sc.lambda_grid); }

CriticalResult find_first_crossing(const std::function<double(double)>& p, double a, double b,
                                   int scan_points, double rel_tol, double zero_tol) {
  if (!(b > a) || scan_points < 1) throw Error(Errc::usage, "critical search needs a < b and a positive scan");
  CriticalResult res;
  std::vector<double> xs(scan_points + 1), ps(scan_points + 1);
  for (int i = 0; i <= scan_points; ++i) {
    xs[i] = a + (b - a) * i / scan_points;
    ps[i] = p(xs[i]);
  }
  res.evaluations = scan_points + 1;
  int first = -1, crossings = 0;
  for (int i = 0; i < scan_points; ++i) {
    if (ps[i] <= 0.0 && ps[i + 1] > 0.0) {
      ++crossings;
      if (first < 0) first = i;
    }
  }
  res.multiple_crossings = crossings > 1;
  if (first < 0) return res;
  res.bracket_lo = xs[first];
  res.bracket_hi = xs[first + 1];
  if (first == 0 && xs[0] == 0.0 && std::abs(ps[0]) <= zero_tol) {
    res.lambda_min = 0.0;
    return res;
  }
  int evals = 0;
  auto f = [&](double x) {
    ++evals;
    const double v = p(x);
    return v > 0.0 ? v : std::min(v, -std::numeric_limits<double>::min());
  };
  auto done = [rel_tol](double lo, double hi) { return hi - lo <= rel_tol * std::abs(hi); };
  const auto [lo, hi] = boost::math::tools::bisect(f, res.bracket_lo, res.bracket_hi, done);
  res.evaluations += evals;
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.lambda_min = 0.5 * (lo + hi);
  return res;
}

CriticalResult critical_coupling(const HarvestScenario& sc, double a, double b, double rel_tol, int scan_points) {
  return find_first_crossing([&](double l) { return simon_value(assemble_blocks(sc, l)); }, a, b,
                             scan_points, rel_tol);
}

CovarianceTwoMode BlockSeries::at(double lambda) const {
  const double l2 = lambda * lambda, l4 = l2 * l2;
  return CovarianceTwoMode::from_blocks(A0 + l2 * A2 + l4 * A4, B0 + l2 * B2 + l4 * B4, l2 * C2);
}

PerturbativeCoefficients perturbative_coefficients(const BlockSeries& s) {
  const Mat2 sg = symplectic_unit();
  const double da = s.A0.determinant(), db = s.B0.determinant(), dc = s.C2.determinant();
  const double ta2 = (s.A0.inverse() * s.A2).trace(), tb2 = (s.B0.inverse() * s.B2).trace();
  const double ta4 = (s.A0.inverse() * s.A4).trace(), tb4 = (s.B0.inverse() * s.B4).trace();
  const double corr = (s.A0 * sg * s.C2 * sg * s.B0 * sg * s.C2.transpose() * sg).trace();
  const double common = -da * db * ta2 * tb2 + (1.0 - db) * (s.A2.determinant() + da * ta4) +
                        (1.0 - da) * (s.B2.determinant() + db * tb4);
  PerturbativeCoefficients c;
  c.p0 = -(da - 1.0) * (db - 1.0);
  c.p2 = (1.0 - da) * db * tb2 + (1.0 - db) * da * ta2;
  c.p4 = corr - 2.0 * dc + common;
  c.p4_tilde = corr + 2.0 * dc + common;
  return c;
}

BlockSeries block_series(const HarvestScenario& sc) {
  if (!sc.zones_spacelike())
    throw Error(Errc::unsupported_expansion, "the expansion needs spacelike coupling zones");
  const LatticeSpec& lat = sc.lattice();
  const Field* src[4] = {&sc.mode_a.f1, &sc.mode_a.f2, &sc.mode_b.f1, &sc.mode_b.f2};
  constexpr int kOrder = 4;
  // amp[k][n][l]: amplitudes of the lambda^n term of mode function k in slot l.
  std::array<std::array<std::array<Eigen::VectorXcd, 3>, kOrder + 1>, 4> amp;
  std::array<std::array<std::array<bool, 3>, kOrder + 1>, 4> live{};
  for (int k = 0; k < 4; ++k) {
    const auto terms = born_theta_terms(sc.coupled, in_slot(lat, k < 2 ? kProbeA : kProbeB, *src[k]), kOrder);
    for (int n = 0; n <= kOrder; ++n)
      for (int l = 0; l < 3; ++l) {
        live[k][n][l] = !terms[n][l].is_zero();
        if (live[k][n][l]) amp[k][n][l] = mode_amplitudes(sc.states[l], terms[n][l]);
      }
  }
  auto coeff = [&](int j, int k, int p) {
    double acc = 0.0;
    for (int n = 0; n <= std::min(p, kOrder); ++n) {
      const int m = p - n;
      if (m > kOrder) continue;
      for (int l = 0; l < 3; ++l)
        if (live[j][n][l] && live[k][m][l])
          acc += beta_from_amplitudes(sc.states[l], amp[j][n][l], amp[k][m][l]);
    }
    return acc;
  };
  auto block = [&](int r, int c, int p) {
    Mat2 M;
    M << coeff(r, c, p), coeff(r, c + 1, p), coeff(r + 1, c, p), coeff(r + 1, c + 1, p);
    return M;
  };
  BlockSeries s;
  s.A0 = block(0, 0, 0);
  s.A2 = block(0, 0, 2);
  s.A4 = block(0, 0, 4);
  s.B0 = block(2, 2, 0);
  s.B2 = block(2, 2, 2);
  s.B4 = block(2, 2, 4);
  s.C2 = block(0, 2, 2);
  return s;
}

PerturbativeCoefficients perturbative_coefficients(const HarvestScenario& sc) {
  return perturbative_coefficients(block_series(sc));
}

ResidualFit perturbative_residual(const std::function<double(double)>& p_s, const PerturbativeCoefficients& c,
                                  const std::vector<double>& grid) {
  ResidualFit fit;
  const double eps = std::numeric_limits<double>::epsilon();
  // p_s is a difference of O(1) determinants, so roundoff sits near eps in absolute terms.
  const double floor = 128.0 * eps;
  std::vector<double> lx, ly;
  for (double l : grid) {
    const double l2 = l * l;
    const double r = std::abs(p_s(l) - (c.p0 + l2 * c.p2 + l2 * l2 * c.p4));
    fit.lambdas.push_back(l);
    fit.residuals.push_back(r);
    if (r > floor && l > 0.0) lx.push_back(std::log(l)), ly.push_back(std::log(r));
  }
  fit.points_used = static_cast<int>(lx.size());
  if (lx.size() < 3) {
    fit.inconclusive = true;
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) sx += lx[i], sy += ly[i], sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

ResidualFit perturbative_residual(const HarvestScenario& sc, const std::vector<double>& grid) {
  const PerturbativeCoefficients c = perturbative_coefficients(sc);
  return perturbative_residual([&](double l) { return simon_value(assemble_blocks(sc, l)); }, c, grid);
}

DetectorSignal detector_signal(const HarvestScenario& sc, double lambda, int which) {
  if (which != kProbeA && which != kProbeB) throw Error(Errc::usage, "probe must be a or b");
  HarvestScenario view = sc;
  (which == kProbeA ? view.coupled.rho_b : view.coupled.rho_a) *= 0.0;
  const ModePair& m = which == kProbeA ? sc.mode_a : sc.mode_b;
  const LatticeSpec& lat = sc.lattice();
  const TripleFunction a = theta_apply(view.coupled, lambda, in_slot(lat, which, m.f1));
  const TripleFunction b = theta_apply(view.coupled, lambda, in_slot(lat, which, m.f2));
  auto part = [&](int l) {
    if (a[l].is_zero() && b[l].is_zero()) return 0.0;
    const QuasiFreeState& st = sc.states[l];
    const double ca = one_point(st, a[l]), cb = one_point(st, b[l]);
    const double e = causal_pairing(lat, sc.coupled.ops[l], a[l], b[l]);
    return 0.5 * (0.5 * (beta_pair(st, a[l], a[l]) + beta_pair(st, b[l], b[l])) + ca * ca + cb * cb - e);
  };
  DetectorSignal s;
  s.system_part = part(kSystem);
  s.probe_part = part(which);
  s.total = s.system_part + s.probe_part;
  return s;
}

HarvestScenario swap_probes(const HarvestScenario& sc) {
  HarvestScenario r = sc;
  std::swap(r.coupled.ops[kProbeA], r.coupled.ops[kProbeB]);
  std::swap(r.coupled.rho_a, r.coupled.rho_b);
  std::swap(r.mode_a, r.mode_b);
  std::swap(r.states[kProbeA], r.states[kProbeB]);
  return r;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return g;
}

}  // namespace harvest
