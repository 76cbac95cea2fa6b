#pragma once

// Test-only reference: brute-force 2-D integration of the GN-model NLI
// integrand for a rectangular single-channel spectrum, evaluated at the
// channel centre. Independent of the closed form in link_model.hpp.

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace chprobe::oracle {

struct GnSpan {
  double length_km;
  double attenuation_db_per_km;
  double gamma_per_w_km;
  double beta2_ps2_per_km;
};

// NLI PSD [W/Hz] at f = 0 produced by one span for a flat PSD over
// [-B/2, B/2]. Frequencies are integrated in GHz.
inline double gn_span_nli_psd(const GnSpan& s, double psd_w_per_hz, double bandwidth_ghz) {
  using boost::math::quadrature::gauss_kronrod;
  const double alpha = std::log(10.0) * s.attenuation_db_per_km / 20.0;  // field, 1/km
  const double beta2 = s.beta2_ps2_per_km * 1e-24;                       // s^2/km
  const double loss = std::exp(-2.0 * alpha * s.length_km);
  const double half = bandwidth_ghz / 2.0;
  const double pi = 3.14159265358979323846;

  // |eta|^2 in km^2 for f1, f2 in GHz.
  auto eta2 = [&](double f1, double f2) {
    const double phase = 4.0 * pi * pi * beta2 * (f1 * 1e9) * (f2 * 1e9);  // 1/km
    const std::complex<double> num = 1.0 - loss * std::exp(std::complex<double>(0.0, phase * s.length_km));
    const std::complex<double> den(2.0 * alpha, -phase);
    return std::norm(num / den);
  };
  auto inner = [&](double f1) {
    const double lo = std::max(-half, -half - f1);
    const double hi = std::min(half, half - f1);
    auto g = [&](double f2) { return eta2(f1, f2); };
    double acc = 0.0;
    if (lo < 0.0 && hi > 0.0) {
      acc += gauss_kronrod<double, 61>::integrate(g, lo, 0.0, 25, 1e-11);
      acc += gauss_kronrod<double, 61>::integrate(g, 0.0, hi, 25, 1e-11);
    } else {
      acc += gauss_kronrod<double, 61>::integrate(g, lo, hi, 25, 1e-11);
    }
    return acc;
  };
  const double integral_ghz2 = gauss_kronrod<double, 61>::integrate(inner, -half, 0.0, 25, 1e-10) +
                               gauss_kronrod<double, 61>::integrate(inner, 0.0, half, 25, 1e-10);
  const double integral_hz2 = integral_ghz2 * 1e18;
  return 16.0 / 27.0 * s.gamma_per_w_km * s.gamma_per_w_km * psd_w_per_hz * psd_w_per_hz * psd_w_per_hz *
         integral_hz2;
}

}  // namespace chprobe::oracle
