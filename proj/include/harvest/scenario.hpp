#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "harvest/protocol.hpp"

namespace harvest {

struct OperatorConfig {
  double mass = 1.0;
  /// Smooth bump potential of height `well_depth`; zero depth means no potential.
  double well_depth = 0.0, well_center = 0.0, well_width = 1.0;
  bool operator==(const OperatorConfig&) const = default;
};

struct StateConfig {
  std::string kind = "vacuum";
  double temperature = 0.0;
  bool operator==(const StateConfig&) const = default;
};

struct ModeConfig {
  /// "carrier": envelope times (cos, sin) of omega (t - t_c); "pair": two separate bumps.
  std::string kind = "carrier";
  BumpParams envelope;
  double omega = 1.0;
  BumpParams second;
  bool operator==(const ModeConfig&) const = default;
};

struct ScenarioConfig {
  LatticeSpec lattice;
  OperatorConfig system, probe_a, probe_b;
  StateConfig state_system, state_a, state_b;
  std::string phase = "lattice";
  BumpParams rho_a, rho_b;
  ModeConfig mode_a, mode_b;
  std::vector<double> lambdas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double critical_lo = 0.0, critical_hi = 1.0, critical_tol = 1e-4;
  int critical_scan = 40;
  double perturb_lo = 1e-3, perturb_hi = 1e-2;
  int perturb_count = 8;
  std::uint64_t seed = 1;
  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_file(const std::string& path);
std::string serialize_config(const ScenarioConfig& c);

FieldOperatorSpec build_operator(const LatticeSpec& lat, const OperatorConfig& c);
/// Normalised mode; `key` prefixes error messages.
ModePair build_mode(const LatticeSpec& lat, const FieldOperatorSpec& op, const ModeConfig& m,
                    const std::string& key);

/// A lattice, one free field and a list of modes ([mode_0], [mode_1], ...).
struct ModeFamily {
  LatticeSpec lattice;
  OperatorConfig field;
  std::vector<ModeConfig> modes;
};
ModeFamily parse_mode_family(const std::string& path);
/// Builds and validates; errors name the offending key.
HarvestScenario build_scenario(const ScenarioConfig& c);
HarvestScenario parse_scenario(const std::string& path);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
inline constexpr const char* kSweepHeader = "lambda,p_s,nu_minus,negativity,det_a,det_b,det_c,trace_term";

/// Command-line entry; returns 0 on success, 1 on validation failure, 2 on usage error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace harvest
