#pragma once

// Quantum side: 1D Gross-Pitaevskii ground state by imaginary-time
// propagation and real-time split-step Fourier evolution.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "tunnelsim/grid.hpp"

namespace tunnelsim {

/// Complex field on a uniform grid, normalized to the atom number.
struct Wavefunction {
  Grid grid;
  std::vector<std::complex<double>> values;
  double time = 0.0;

  double norm() const;
  std::vector<double> density() const;
  /// Zero-padded copy on an aligned, larger grid.
  Wavefunction embedded_in(const Grid& outer) const;
};

double mean_position(const Wavefunction& psi);
double rms_width(const Wavefunction& psi);
double mean_momentum(const Wavefunction& psi);

/// Totals (not per particle) of the GPE energy functional terms.
struct EnergyParts {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;  // (g/2) int |psi|^4
  double total() const noexcept { return kinetic + potential + interaction; }
};

EnergyParts energy_functional(const Wavefunction& psi, std::span<const double> potential,
                              double g1d);

/// |psi~(k)|^2 with psi~(k) = int dz e^{-ikz} psi(z) / sqrt(2 pi), sorted by k;
/// sum(density) * dk equals the norm.
struct MomentumDensity {
  std::vector<double> k;
  std::vector<double> density;
  double dk = 0.0;
};

MomentumDensity momentum_density(const Wavefunction& psi);

struct GroundStateOptions {
  double dtau = 1e-3;
  double tolerance = 1e-12;  // on |mu_i - mu_{i-1}| / |mu_i|
  long max_iterations = 400000;
  bool record_energy = false;
};

struct GroundState {
  Wavefunction psi;
  double mu = 0.0;
  long iterations = 0;
  std::vector<double> energy_history;  // per particle, one entry per iteration
};

/// Imaginary-time split-step propagation, renormalized to N every step.
/// The local sub-step is integrated with RK4 in the interaction picture of the
/// external potential. Throws SolverError when max_iterations is reached.
GroundState ground_state(const Grid& grid, std::span<const double> trap, double g1d,
                         double atom_number, const GroundStateOptions& options = {});

Wavefunction apply_kick(Wavefunction psi, double k);

struct EvolveOptions {
  double dt = 1e-4;
  double t_final = 2.0;
  long observer_every = 100;
  double norm_tolerance = 1e-8;
  double edge_margin = 10.0;            // l_z
  double edge_mass_tolerance = 1e-10;   // fraction of N
};

struct Snapshot {
  double t = 0.0;
  long step = 0;
  const Grid* grid = nullptr;
  std::span<const std::complex<double>> psi;
  double norm = 0.0;
  double energy_per_particle = 0.0;
};

/// Return false to stop the evolution after this sample.
using Observer = std::function<bool(const Snapshot&)>;

/// Strang split-step evolution: half kinetic step in k-space, exact local
/// phase step exp(-i (V + g|psi|^2) dt) in z-space, half kinetic step.
/// Consecutive half kinetic steps between observer samples are fused.
Wavefunction evolve(Wavefunction psi, std::span<const double> external, double g1d,
                    const EvolveOptions& options, const Observer& observer = {});

/// V_b + g |psi|^2; diagnostic only.
std::vector<double> effective_potential(const Wavefunction& psi, std::span<const double> barrier,
                                        double g1d);

}  // namespace tunnelsim
