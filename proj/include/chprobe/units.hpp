#pragma once

#include <cmath>

namespace chprobe {

inline constexpr double kPlanck = 6.62607015e-34;  // J*s
inline constexpr double kRefBandwidthGhz = 12.5;   // 0.1 nm at 1550 nm
inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watt_to_dbm(double w) { return linear_to_db(w / 1e-3); }

// Field-amplitude attenuation coefficient [1/km] from a dB/km power loss.
inline double field_attenuation_per_km(double attenuation_db_per_km) {
  return std::log(10.0) * attenuation_db_per_km / 20.0;
}

// Combine SNRs given in dB by summing reciprocals in linear units.
template <typename... Snrs>
double combine_snr_db(double first, Snrs... rest) {
  double inv = 0.0;
  for (double s : {first, static_cast<double>(rest)...}) inv += 1.0 / db_to_linear(s);
  return -linear_to_db(inv);
}

}  // namespace chprobe
