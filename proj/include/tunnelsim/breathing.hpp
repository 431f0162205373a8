#pragma once

// Monopole-mode check: the trapped ground state is released into a slightly
// tighter trap and the oscillation frequency of the width is measured in both
// solvers.

#include <cstdint>
#include <optional>
#include <vector>

#include "tunnelsim/fit.hpp"
#include "tunnelsim/simulation.hpp"
#include "tunnelsim/units.hpp"

namespace tunnelsim {

struct BreathingOptions {
  double quench = 1.02;       // omega_after / omega_z
  double dt = 2.5e-4;         // 1/w_z
  double duration = 24.0;     // 1/w_z
  double sample_every = 0.02; // 1/w_z
  double span = 64.0;         // l_z, centred on the trap
  std::size_t grid_points = 2048;
  long samples = 10000;
  std::uint64_t seed = 1;
  std::optional<double> a_s;  // Bohr radii; a_s_initial when unset, 0 allowed
  bool gpe = true;
  bool bve = true;

  void validate() const;
};

struct BreathingMode {
  double frequency = 0.0;  // w_z
  double ratio = 0.0;      // frequency / omega_after
  FitResult fit;
  std::vector<double> t;
  std::vector<double> width_sq;  // <(z - <z>)^2>, l_z^2
};

struct BreathingResult {
  double g1d = 0.0;
  double omega_after = 0.0;
  double mu = 0.0;
  std::optional<BreathingMode> gpe;
  std::optional<BreathingMode> bve;
};

/// Uses one scattering length for both the ground state and the evolution; only the trap
/// frequency is changed. Throws ValidationError when a sinusoid fit fails.
BreathingResult breathing_mode_test(const PhysicsConfig& cfg, const GridSettings& settings,
                                    const BreathingOptions& options = {});

}  // namespace tunnelsim
