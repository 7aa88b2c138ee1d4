#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "harvest/errors.hpp"
#include "harvest/scenario.hpp"

namespace harvest {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_sweep(const std::string& path, const std::string& out_path, std::ostream& out) {
  const HarvestScenario sc = parse_scenario(path);
  const auto rows = sweep(sc);
  if (out_path.empty() || out_path == "-") write_sweep_csv(rows, out);
  else write_sweep_csv(rows, out_path);
  return 0;
}

int run_critical(const std::string& path, std::vector<double> interval, double tol, int scan, std::ostream& out) {
  const ScenarioConfig cfg = parse_config_file(path);
  if (interval.empty()) interval = {cfg.critical_lo, cfg.critical_hi};
  if (tol <= 0.0) tol = cfg.critical_tol;
  if (scan <= 0) scan = cfg.critical_scan;
  ScenarioConfig widened = cfg;
  widened.critical_lo = interval[0];
  widened.critical_hi = interval[1];
  const HarvestScenario sc = build_scenario(widened);
  const CriticalResult r = critical_coupling(sc, interval[0], interval[1], tol, scan);
  if (!r.lambda_min) {
    out << "no entanglement in [" << g17(interval[0]) << ", " << g17(interval[1]) << "]\n";
    return 0;
  }
  out << "lambda_min = " << g17(*r.lambda_min) << "\n"
      << "bracket = [" << g17(r.bracket_lo) << ", " << g17(r.bracket_hi) << "]\n"
      << "evaluations = " << r.evaluations << "\n";
  if (r.multiple_crossings) out << "warning: several sign changes in the scanned interval\n";
  return 0;
}

int run_perturb(const std::string& path, std::ostream& out) {
  const ScenarioConfig cfg = parse_config_file(path);
  const HarvestScenario sc = build_scenario(cfg);
  const PerturbativeCoefficients c = perturbative_coefficients(sc);
  out << "p0 = " << g17(c.p0) << "\np2 = " << g17(c.p2) << "\np4 = " << g17(c.p4)
      << "\np4_tilde = " << g17(c.p4_tilde) << "\n";
  const ResidualFit fit = perturbative_residual(sc, geometric_grid(cfg.perturb_lo, cfg.perturb_hi, cfg.perturb_count));
  if (fit.inconclusive) out << "residual_slope = inconclusive (residual at roundoff level)\n";
  else out << "residual_slope = " << g17(fit.slope) << " (" << fit.points_used << " points)\n";
  return 0;
}

int run_signal(const std::string& path, double lambda, const std::string& probe, std::ostream& out) {
  const HarvestScenario sc = parse_scenario(path);
  const DetectorSignal s = detector_signal(sc, lambda, probe == "a" ? kProbeA : kProbeB);
  out << "total = " << g17(s.total) << "\nsystem_part = " << g17(s.system_part)
      << "\nprobe_part = " << g17(s.probe_part) << "\n";
  return 0;
}

int run_witness(const std::string& path, double lambda, std::ostream& out) {
  const HarvestScenario sc = parse_scenario(path);
  const CovarianceTwoMode g = assemble_blocks(sc, lambda);
  out << "p_s = " << g17(simon_value(g)) << "\n";
  const auto rep = p_function_witness(g);
  if (!rep) {
    out << "witness = none (gamma - 1 is not positive semidefinite)\n";
    if (simon_value(g) <= kDefaultTol) out << "separable by the Simon criterion\n";
  } else if (rep->rank_deficient) {
    out << "witness = rank deficient (P-function concentrated on a lower-dimensional set)\n";
  } else {
    out << "witness = gaussian P-function\nnormalization = " << g17(rep->normalization) << "\n";
  }
  return 0;
}

int run_validate(const std::string& path, std::uint64_t seed, bool seed_given, std::ostream& out) {
  const ScenarioConfig cfg = parse_config_file(path);
  const HarvestScenario sc = build_scenario(cfg);
  const LatticeSpec& lat = sc.lattice();
  if (!seed_given) seed = cfg.seed;
  bool ok = true;
  auto report = [&](bool pass, const std::string& what) {
    out << (pass ? "ok   " : "FAIL ") << what << "\n";
    ok = ok && pass;
  };

  double worst = 0.0;
  const std::pair<int, const Field*> sources[] = {{kProbeA, &sc.mode_a.f1}, {kProbeA, &sc.mode_a.f2},
                                                  {kProbeB, &sc.mode_b.f1}, {kProbeB, &sc.mode_b.f2},
                                                  {kSystem, &sc.coupled.rho_a}, {kSystem, &sc.coupled.rho_b}};
  for (const auto& [slot, f] : sources) {
    const FieldOperatorSpec& op = sc.coupled.ops[slot];
    const Field u = green_apply(lat, op, Direction::advanced, *f);
    worst = std::max(worst, green_residual(lat, op, u, *f) / f->max_abs());
  }
  report(std::isfinite(worst) && worst < 1.0, "green residual (relative) " + g17(worst));

  const char* names[3] = {"system", "probe_a", "probe_b"};
  for (int l = 0; l < 3; ++l) {
    const PositivityReport p = validate_positivity(sc.states[l], 20, seed + l);
    report(p.passed, std::string("positivity ") + names[l] + " max violation " + g17(p.max_violation));
  }

  if (sc.zones_spacelike()) {
    const double lam = sc.lambda_grid.back();
    const TripleFunction F = theta_apply(sc.coupled, lam, in_slot(lat, kProbeA, sc.mode_a.f1));
    report(F[kProbeB].max_abs() == 0.0, "probe B untouched by theta(0, f_A, 0): " + g17(F[kProbeB].max_abs()));
  } else {
    out << "note coupling zones are not spacelike; causal factorisation not checked\n";
  }

  for (double l : sc.lambda_grid) {
    const double m = uncertainty_margin(blocks_from_images(sc, scattered_modes(sc, l)).gamma);
    if (m < -1e-8) report(false, "uncertainty at lambda " + g17(l) + " margin " + g17(m));
  }
  report(ok, "uncertainty over the lambda grid");
  return ok ? 0 : 1;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement harvesting on a 1+1 lattice", "harvest"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for sampled checks");

  std::string scenario, out_path, probe = "a";
  std::vector<double> interval;
  double tol = 0.0, lambda = 0.0;
  int scan = 0;

  auto* s_sweep = app.add_subcommand("sweep", "Simon value and negativity over the lambda grid");
  s_sweep->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  s_sweep->add_option("-o,--output", out_path, "CSV output (default stdout)");

  auto* s_crit = app.add_subcommand("critical", "Locate the critical coupling");
  s_crit->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  s_crit->add_option("--interval", interval)->delimiter(',')->expected(2);
  s_crit->add_option("--tol", tol, "Relative tolerance");
  s_crit->add_option("--scan", scan, "Coarse scan points");

  auto* s_pert = app.add_subcommand("perturb", "Perturbative coefficients and residual slope");
  s_pert->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);

  auto* s_sig = app.add_subcommand("signal", "Detector number expectation");
  s_sig->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  s_sig->add_option("--lambda", lambda)->required();
  s_sig->add_option("--probe", probe)->check(CLI::IsMember({"a", "b"}));

  auto* s_wit = app.add_subcommand("witness", "P-function separability witness");
  s_wit->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  s_wit->add_option("--lambda", lambda)->required();

  auto* s_val = app.add_subcommand("validate", "Residual, positivity and causality checks");
  s_val->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "harvest: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (!interval.empty() && !(interval[1] > interval[0])) {
    err << "harvest: --interval needs a < b\n";
    return 2;
  }

  try {
    if (*s_sweep) return run_sweep(scenario, out_path, out);
    if (*s_crit) return run_critical(scenario, interval, tol, scan, out);
    if (*s_pert) return run_perturb(scenario, out);
    if (*s_sig) return run_signal(scenario, lambda, probe, out);
    if (*s_wit) return run_witness(scenario, lambda, out);
    if (*s_val) return run_validate(scenario, seed, seed_opt->count() > 0, out);
  } catch (const Error& e) {
    err << "harvest: " << e.what() << "\n";
    return e.code() == Errc::usage ? 2 : 1;
  }
  return 2;
}

}  // namespace harvest
