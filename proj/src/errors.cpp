#include "harvest/errors.hpp"

namespace harvest {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_matrix: return "malformed matrix";
    case Errc::precondition: return "precondition";
    case Errc::inconsistent_covariance: return "inconsistent covariance";
    case Errc::geometry: return "geometry";
    case Errc::stability: return "stability";
    case Errc::degenerate_mode: return "degenerate mode";
    case Errc::lattice_mismatch: return "lattice mismatch";
    case Errc::infrared: return "infrared";
    case Errc::solver_resolution: return "solver resolution";
    case Errc::causal_geometry: return "causal geometry";
    case Errc::unsupported_expansion: return "unsupported expansion";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::usage: return "usage";
  }
  return "error";
}

}  // namespace harvest
