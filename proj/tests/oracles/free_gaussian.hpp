#pragma once

// Free dispersion of a Gaussian packet, hbar = m = 1.

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

/// psi(z, t) for an initial real Gaussian of density std-dev s0 centred at z0, normalized to N.
inline std::complex<double> free_gaussian(double z, double t, double s0, double z0, double N) {
  const std::complex<double> a(1.0, t / (2.0 * s0 * s0));
  const double d = z - z0;
  return std::sqrt(N) * std::pow(2.0 * std::numbers::pi * s0 * s0, -0.25) / std::sqrt(a) *
         std::exp(-d * d / (4.0 * s0 * s0 * a));
}

/// Density std-dev at time t.
inline double free_width(double t, double s0) {
  return s0 * std::sqrt(1.0 + t * t / (4.0 * s0 * s0 * s0 * s0));
}

}  // namespace oracle
