#pragma once

// One barrier collision from the shared initial condition: the trapped ground
// state at the initial scattering length, kicked and released onto the barrier
// with the quenched coupling.

#include <cstdint>
#include <functional>
#include <optional>

#include "tunnelsim/analysis.hpp"
#include "tunnelsim/bve.hpp"
#include "tunnelsim/gpe.hpp"
#include "tunnelsim/grid.hpp"
#include "tunnelsim/potentials.hpp"
#include "tunnelsim/units.hpp"

namespace tunnelsim {

struct GridSettings {
  double z_min = -120.0;  // l_z
  double z_max = 200.0;   // l_z
  std::size_t n_points = 16384;
  double dt = 1e-4;         // 1/w_z
  long observer_every = 100;
  std::optional<double> t_cap;  // default_stop_cap when unset
  double edge_margin = 10.0;   // l_z
  std::size_t ground_state_points = 2048;  // compact window around the trap
  double ground_state_dtau = 1e-3;
  double ground_state_tolerance = 1e-12;
  int max_grid_extensions = 4;

  Grid grid() const { return Grid(z_min, z_max, n_points); }
  void validate() const;
};

struct InitialState {
  PhysicsConfig physics;
  DerivedScales scales;
  Grid grid;        // full evolution grid
  GroundState ground;  // on the full grid

  double sigma_c() const { return *scales.sigma_c; }
};

/// Imaginary-time ground state in the axial trap at a_s_initial on a compact
/// window of the evolution grid, embedded into the full grid.
InitialState prepare_initial_state(const PhysicsConfig& cfg, const GridSettings& settings);

/// V0 = ratio * E with E = k^2/2, centred per the placement rule.
BarrierSpec barrier_for(const PhysicsConfig& cfg, double V0_over_E, double sigma_b);

/// 1D coupling for a quench scattering length in Bohr radii.
double quench_coupling(const PhysicsConfig& cfg, double a_s_bohr);

struct RunOutcome {
  TransmissionResult result;
  std::string diagnostics;
  Grid grid;  // grid actually used
};

/// Kicked GPE collision until the stop criterion or cap. Grows the grid and
/// retries when the density reaches an edge.
/// `hook` sees every observer sample before the stop criterion is evaluated.
RunOutcome run_gpe(const InitialState& init, const BarrierSpec& barrier, double g1d,
                   const GridSettings& settings, const StopOptions& stop = {},
                   const Observer& hook = {});

/// One BVE realization sampled from the same ground state.
RunOutcome run_bve(const InitialState& init, const BarrierSpec& barrier, double g1d, long M,
                   std::uint64_t seed, const GridSettings& settings, const StopOptions& stop = {},
                   const EnsembleObserver& hook = {});

/// KDE grid covering `domain` with spacing at most nu / 8.
Grid kde_grid(const Grid& domain, double bandwidth);

}  // namespace tunnelsim
