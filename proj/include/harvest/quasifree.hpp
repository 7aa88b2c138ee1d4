#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "harvest/lattice.hpp"
#include "harvest/symplectic.hpp"

namespace harvest {

enum class StateKind { vacuum, thermal, explicit_form };

/// How mode phases are sampled in time.  `lattice` uses the leapfrog dispersion
/// relation so the commutator part equals the discrete causal propagator;
/// `continuum` uses e^{i omega t} with weight 1/(2 omega).
enum class PhaseModel { lattice, continuum };

struct QuasiFreeState {
  LatticeSpec lattice;
  FieldOperatorSpec op;
  StateKind kind = StateKind::vacuum;
  double temperature = 0.0;
  PhaseModel phase = PhaseModel::lattice;

  Eigen::VectorXd omega;      ///< sqrt of the spatial eigenvalues
  Eigen::VectorXd frequency;  ///< frequency used in the time phase
  Eigen::VectorXd comm_weight;
  Eigen::VectorXd sym_weight;  ///< comm_weight times the thermal factor
  Eigen::MatrixXd modes;       ///< columns phi_i, normalised so sum dx phi_i phi_k = delta_ik

  std::function<double(const Field&, const Field&)> explicit_beta;
  std::function<double(const Field&)> chi;
};

/// Spatial matrix -Delta_h + m^2 + chi(x).
Eigen::MatrixXd spatial_operator(const LatticeSpec& lat, const FieldOperatorSpec& op);

QuasiFreeState build_state(const LatticeSpec& lat, const FieldOperatorSpec& op, StateKind kind,
                           double temperature = 0.0, PhaseModel phase = PhaseModel::lattice);

/// f_hat_i = sum dt dx e^{i w_i t} phi_i(x) f(t, x).
Eigen::VectorXcd mode_amplitudes(const QuasiFreeState& s, const Field& f);
double beta_from_amplitudes(const QuasiFreeState& s, const Eigen::VectorXcd& f, const Eigen::VectorXcd& g);
double commutator_from_amplitudes(const QuasiFreeState& s, const Eigen::VectorXcd& f,
                                  const Eigen::VectorXcd& g);

double beta_pair(const QuasiFreeState& s, const Field& f, const Field& g);
/// Imaginary part of the mode-sum two-point function, i.e. E(f, g).
double mode_commutator(const QuasiFreeState& s, const Field& f, const Field& g);
double one_point(const QuasiFreeState& s, const Field& f);

CovarianceOneMode restrict_covariance(const QuasiFreeState& s, const ModePair& mode, double tol = 1e-8);

struct PositivityReport {
  int samples = 0;
  double max_violation = 0.0;  ///< max of (|E|^2 - beta_ff beta_gg) / (beta_ff beta_gg)
  bool passed = false;
};

/// Samples random bump pairs; `beta_scale` rescales beta to exercise the detector.
PositivityReport validate_positivity(const QuasiFreeState& s, int sample_count, std::uint64_t seed,
                                     double tol = 1e-6, double beta_scale = 1.0);

}  // namespace harvest
