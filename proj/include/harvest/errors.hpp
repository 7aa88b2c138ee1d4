#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

enum class Errc {
  malformed_matrix,
  precondition,
  inconsistent_covariance,
  geometry,
  stability,
  degenerate_mode,
  lattice_mismatch,
  infrared,
  solver_resolution,
  causal_geometry,
  unsupported_expansion,
  config,
  io,
  usage,
};

const char* errc_name(Errc c);

/// Single exception type for the library; `code()` tells callers which check failed.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}
  Errc code() const noexcept { return code_; }
  /// Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace harvest
