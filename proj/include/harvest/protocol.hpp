#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harvest/lattice.hpp"
#include "harvest/quasifree.hpp"
#include "harvest/symplectic.hpp"

namespace harvest {

struct HarvestScenario {
  CoupledSystem coupled;
  ModePair mode_a, mode_b;
  std::array<QuasiFreeState, 3> states;
  std::vector<double> lambda_grid;

  const LatticeSpec& lattice() const { return coupled.lattice; }
  bool zones_spacelike() const;
  /// Throws causal_geometry if a mode reaches into the causal past of a coupling zone.
  void validate_geometry() const;
};

struct SweepRow {
  double lambda = 0.0;
  double p_s = 0.0;
  double nu_minus = 0.0;
  double negativity = 0.0;
  double det_a = 0.0, det_b = 0.0, det_c = 0.0;
  double trace_term = 0.0;
};

/// theta images of (0, f_j^A, 0) and (0, 0, f_j^B), j = 1, 2.
std::array<TripleFunction, 4> scattered_modes(const HarvestScenario& sc, double lambda);
CovarianceTwoMode blocks_from_images(const HarvestScenario& sc, const std::array<TripleFunction, 4>& F,
                                     const std::array<bool, 3>& use_slot = {true, true, true});

CovarianceTwoMode assemble_blocks(const HarvestScenario& sc, double lambda, double tol = 1e-8);
SweepRow make_row(double lambda, const CovarianceTwoMode& g);
std::vector<SweepRow> sweep(const HarvestScenario& sc);
std::vector<SweepRow> sweep(const HarvestScenario& sc, const std::vector<double>& grid);

struct CriticalResult {
  std::optional<double> lambda_min;
  bool multiple_crossings = false;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  int evaluations = 0;
};

/// Scan then bisect for the first sign change of p(lambda) from <= 0 to > 0.
CriticalResult find_first_crossing(const std::function<double(double)>& p, double a, double b,
                                   int scan_points, double rel_tol, double zero_tol = 1e-12);
CriticalResult critical_coupling(const HarvestScenario& sc, double a, double b, double rel_tol = 1e-4,
                                 int scan_points = 40);

/// Coefficients of the lambda expansion of the blocks (C starts at lambda^2).
struct BlockSeries {
  Mat2 A0 = Mat2::Identity(), A2 = Mat2::Zero(), A4 = Mat2::Zero();
  Mat2 B0 = Mat2::Identity(), B2 = Mat2::Zero(), B4 = Mat2::Zero();
  Mat2 C2 = Mat2::Zero();

  /// Blocks truncated at lambda^4.
  CovarianceTwoMode at(double lambda) const;
};

struct PerturbativeCoefficients {
  double p0 = 0.0, p2 = 0.0, p4 = 0.0;
  /// p4 with the (1 - det C)^2 polynomial.
  double p4_tilde = 0.0;
};

PerturbativeCoefficients perturbative_coefficients(const BlockSeries& s);
BlockSeries block_series(const HarvestScenario& sc);
PerturbativeCoefficients perturbative_coefficients(const HarvestScenario& sc);

struct ResidualFit {
  double slope = 0.0;
  bool inconclusive = false;
  int points_used = 0;
  std::vector<double> lambdas, residuals;
};

ResidualFit perturbative_residual(const std::function<double(double)>& p_s, const PerturbativeCoefficients& c,
                                  const std::vector<double>& grid);
ResidualFit perturbative_residual(const HarvestScenario& sc, const std::vector<double>& grid);

struct DetectorSignal {
  double total = 0.0, system_part = 0.0, probe_part = 0.0;
};

/// Number expectation of probe `which` (kProbeA or kProbeB) with the other coupling off.
DetectorSignal detector_signal(const HarvestScenario& sc, double lambda, int which);

/// Swap the roles of the two probes.
HarvestScenario swap_probes(const HarvestScenario& sc);

std::vector<double> geometric_grid(double lo, double hi, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace harvest
