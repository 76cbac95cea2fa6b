#pragma once

#include "chprobe/error.hpp"
#include "chprobe/units.hpp"

namespace chprobe {

// GOSNR (re 12.5 GHz) -> symbol-rate-referred GSNR. This single convention is
// shared by the link model and the probe engine; no polarization factor.
inline double normalize_to_gsnr(double gosnr_db, double symbol_rate_gbd) {
  if (!(symbol_rate_gbd > 0.0)) throw DomainError("symbol rate must be positive");
  return gosnr_db + linear_to_db(kRefBandwidthGhz / symbol_rate_gbd);
}

inline double gsnr_to_gosnr(double gsnr_db, double symbol_rate_gbd) {
  if (!(symbol_rate_gbd > 0.0)) throw DomainError("symbol rate must be positive");
  return gsnr_db - linear_to_db(kRefBandwidthGhz / symbol_rate_gbd);
}

}  // namespace chprobe
