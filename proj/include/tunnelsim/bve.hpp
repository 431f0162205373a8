#pragma once

// Classical side: Monte-Carlo Boltzmann-Vlasov dynamics. M classical samples
// follow Newton's equations in the barrier plus a mean-field potential
// estimated by a Gaussian kernel density of the sample positions.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tunnelsim/grid.hpp"
#include "tunnelsim/gpe.hpp"
#include "tunnelsim/potentials.hpp"

namespace tunnelsim {

struct PhaseSpaceEnsemble {
  std::vector<double> z;  // l_z
  std::vector<double> p;  // hbar / l_z
  double bandwidth = 0.0; // KDE width nu, fixed at t = 0
  double sigma_z = 0.0;   // position std-dev of the initial samples
  std::uint64_t seed = 0;
  double time = 0.0;

  std::size_t size() const noexcept { return z.size(); }
};

/// Draws z_i from |psi0|^2 / N and p_i from the kicked momentum density
/// |psi0~(p - k)|^2 / N, independently (product distribution). Both draws use
/// inverse-CDF sampling of the grid cell masses with uniform placement inside
/// the cell. Throws SamplingError if psi0 is not normalized to atom_number.
PhaseSpaceEnsemble sample_initial(const Wavefunction& psi0, double atom_number, double k, long M,
                                  std::uint64_t seed);

/// nu = (4 sigma_z^5 / (3 M))^(1/5).
double kde_bandwidth(double sigma_z, long M);

/// Gridded estimate: cloud-in-cell deposit on `grid`, then spectral
/// convolution with the unit-norm Gaussian of width nu.
std::vector<double> kde_density(const PhaseSpaceEnsemble& ensemble, const Grid& grid);

/// Reference estimate by direct summation of the kernel at every grid point.
std::vector<double> kde_density_direct(const PhaseSpaceEnsemble& ensemble, const Grid& grid);

/// V_m(z) = N g1d f_nu(z).
std::vector<double> mean_field_potential(const PhaseSpaceEnsemble& ensemble, const Grid& grid,
                                         double g1d, double atom_number);

/// External forces for the classical samples: Gaussian barrier plus an optional harmonic trap.
struct ExternalField {
  BarrierSpec barrier;
  double trap_omega = 0.0;
  double trap_center = 0.0;

  double value(double z) const noexcept;
  double force(double z) const noexcept;
};

/// Mean-field force evaluator. Owns the FFT workspace for one ensemble.
class KdeForce {
 public:
  KdeForce(const Grid& grid, double bandwidth);
  ~KdeForce();
  KdeForce(KdeForce&&) noexcept;
  KdeForce& operator=(KdeForce&&) noexcept;

  /// out_i = -coupling * f_nu'(z_i), coupling = N g1d. Throws DomainError if any
  /// sample lies outside the grid.
  void force(std::span<const double> z, double coupling, std::span<double> out);
  /// Same estimate evaluated by direct pairwise kernel sums (O(M^2)).
  static void force_direct(std::span<const double> z, double bandwidth, double coupling,
                           std::span<double> out);

  const Grid& grid() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BveOptions {
  double dt = 1e-4;
  double t_final = 2.0;
  long observer_every = 100;
  Grid grid;  // KDE and domain grid
};

struct EnsembleSnapshot {
  double t = 0.0;
  long step = 0;
  const PhaseSpaceEnsemble* ensemble = nullptr;
  /// Sum over samples of p^2/2 + V_ext, divided by M.
  double energy_per_sample = 0.0;
};

using EnsembleObserver = std::function<bool(const EnsembleSnapshot&)>;

/// Velocity-Verlet integration of the M coupled samples. The mean-field force is
/// recomputed once per step from the current positions. Throws DivergenceError on
/// non-finite forces and DomainError when a sample leaves the grid.
PhaseSpaceEnsemble evolve_ensemble(PhaseSpaceEnsemble ensemble, const ExternalField& field,
                                   double g1d, double atom_number, const BveOptions& options,
                                   const EnsembleObserver& observer = {});

inline PhaseSpaceEnsemble evolve_ensemble(PhaseSpaceEnsemble ensemble, const BarrierSpec& barrier,
                                          double g1d, double atom_number,
                                          const BveOptions& options,
                                          const EnsembleObserver& observer = {}) {
  return evolve_ensemble(std::move(ensemble), ExternalField{barrier}, g1d, atom_number, options,
                         observer);
}

/// Grid spacing used for the KDE deposit: nu / 8.
double kde_cell_size(double bandwidth);

}  // namespace tunnelsim
