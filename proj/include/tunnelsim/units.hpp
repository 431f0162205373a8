#pragma once

// Physical parameters, oscillator-unit conversion and the Thomas-Fermi
// dimensional reduction that produces the 1D coupling.
//
// Internally every solver works in harmonic-oscillator units of the axial
// trap: length l_z = sqrt(hbar / (m w_z)), time 1/w_z, energy hbar w_z, so
// hbar = m = w_z = 1.

#include <numbers>
#include <optional>

namespace tunnelsim {

namespace constants {
// CODATA 2018.
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kBohrRadius = 5.29177210903e-11;  // m
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kRb85MassU = 84.911789738;
inline constexpr double kRb85Mass = kRb85MassU * kAtomicMassUnit;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace constants

struct PhysicsConfig {
  double atom_number = 1.0e5;
  double mass = constants::kRb85Mass;                 // kg
  double omega_perp = constants::kTwoPi * 70.0;       // rad/s
  double omega_z = constants::kTwoPi * 10.0;          // rad/s
  double a_s_initial = 5.0;                           // Bohr radii
  double a_s_quench = 0.0;                            // Bohr radii, may be negative
  double kick_k = 20.0;                               // 1/l_z
  double trap_center = -50.0;                         // l_z
  // Cloud width quoted for the initial condition; positions the barrier and
  // sets the sigma_c unit of barrier-width sweeps.
  double sigma_c_ref = 4.7;                           // l_z
  long samples = 10000;
  long realizations = 20;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct DerivedScales {
  double l_z = 0.0;          // m
  double energy_unit = 0.0;  // J (hbar w_z)
  double time_unit = 0.0;    // s (1/w_z)
  double g3d_initial = 0.0;  // J m^3
  double g3d_quench = 0.0;   // J m^3
  double g1d_initial = 0.0;  // hbar w_z l_z
  double g1d_quench = 0.0;   // hbar w_z l_z
  double mu3d = 0.0;         // hbar w_z, at a_s_initial
  double mu1d = 0.0;         // hbar w_z, Thomas-Fermi 1D value from g1d_initial
  double kinetic_E = 0.0;    // hbar w_z, k^2/2
  std::optional<double> sigma_c;  // l_z, RMS width of the computed ground state
};

DerivedScales nondimensionalize(const PhysicsConfig& cfg);

/// 3D contact coupling 4 pi hbar^2 a_s / m in J m^3. Linear and odd in a_s.
double derive_g3d(double a_s_bohr, double mass);

/// 3D Thomas-Fermi chemical potential in units of hbar w_z.
///
/// From the normalization of the TF density over the cigar ellipsoid
/// with radii r_TF = sqrt(2 mu / (m w_perp^2)) and z_TF = sqrt(2 mu / (m w_z^2)):
/// mu^(5/2) = 15 N g3d w_perp^2 w_z (m/2)^(3/2) / (8 pi).
/// Throws DerivationDomainError for g3d <= 0.
double derive_mu3d(const PhysicsConfig& cfg, double g3d);

/// Effective 1D coupling (units hbar w_z l_z) chosen so that mu1D = mu3D.
/// Odd extension for attractive interactions: g1d(-a) = -g1d(a).
double derive_g1d(const PhysicsConfig& cfg, double g3d);

/// 1D Thomas-Fermi chemical potential (oscillator units) for coupling g1d and N atoms.
double mu1d_thomas_fermi(double g1d, double atom_number);

/// Thomas-Fermi half length sqrt(2 mu) in l_z.
double thomas_fermi_radius(double mu1d);

}  // namespace tunnelsim
