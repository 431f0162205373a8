#include "tunnelsim/potentials.hpp"

#include "tunnelsim/error.hpp"

namespace tunnelsim {

void BarrierSpec::validate() const {
  if (!(V0 >= 0.0) || !std::isfinite(V0)) throw ConfigError("barrier V0 must be >= 0");
  if (!(sigma_b > 0.0) || !std::isfinite(sigma_b)) throw ConfigError("barrier sigma_b must be > 0");
}

double place_barrier(double z0, double sigma_b, double sigma_c) {
  constexpr double kClearance = 15.0;
  return z0 + 3.0 * (sigma_b + sigma_c) + kClearance;
}

BarrierSpec make_barrier(double V0, double sigma_b, double z0, double sigma_c) {
  BarrierSpec spec{V0, sigma_b, place_barrier(z0, sigma_b, sigma_c)};
  spec.validate();
  return spec;
}

std::vector<double> harmonic_potential(const Grid& grid, double z0, double omega) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double d = grid.z(j) - z0;
    v[j] = 0.5 * omega * omega * d * d;
  }
  return v;
}

std::vector<double> gaussian_barrier(const Grid& grid, const BarrierSpec& spec) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = spec.value(grid.z(j));
  return v;
}

}  // namespace tunnelsim
