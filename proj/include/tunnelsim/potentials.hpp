#pragma once

#include <cmath>
#include <vector>

#include "tunnelsim/grid.hpp"

namespace tunnelsim {

/// Gaussian barrier V0 exp(-(z - z0')^2 / sigma_b^2) with its measurement regions.
struct BarrierSpec {
  double V0 = 0.0;        // hbar w_z
  double sigma_b = 1.0;   // l_z
  double z0_prime = 0.0;  // l_z

  double z_T() const noexcept { return z0_prime + 2.0 * sigma_b; }
  double z_R() const noexcept { return z0_prime - 2.0 * sigma_b; }

  double value(double z) const noexcept {
    const double u = (z - z0_prime) / sigma_b;
    return V0 * std::exp(-u * u);
  }
  double derivative(double z) const noexcept {
    const double u = (z - z0_prime) / sigma_b;
    return -2.0 * u / sigma_b * V0 * std::exp(-u * u);
  }

  /// Throws ConfigError when V0 < 0 or sigma_b <= 0.
  void validate() const;
};

/// Barrier centre such that its 3 sigma_b tail sits 15 l_z beyond the 3 sigma_c cloud edge.
double place_barrier(double z0, double sigma_b, double sigma_c);

BarrierSpec make_barrier(double V0, double sigma_b, double z0, double sigma_c);

/// (1/2) omega^2 (z - z0)^2 in oscillator units.
std::vector<double> harmonic_potential(const Grid& grid, double z0, double omega = 1.0);

std::vector<double> gaussian_barrier(const Grid& grid, const BarrierSpec& spec);

}  // namespace tunnelsim
