#include "tunnelsim/units.hpp"

#include <cmath>
#include <string>

#include "tunnelsim/error.hpp"

namespace tunnelsim {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("physics.") + name + " must be positive, got " +
                      std::to_string(value));
  }
}

}  // namespace

void PhysicsConfig::validate() const {
  require_positive(atom_number, "atom_number");
  require_positive(mass, "mass");
  require_positive(omega_perp, "omega_perp");
  require_positive(omega_z, "omega_z");
  if (!(a_s_initial >= 0.0) || !std::isfinite(a_s_initial)) {
    throw ConfigError("physics.a_s_initial must be non-negative, got " + std::to_string(a_s_initial));
  }
  require_positive(sigma_c_ref, "sigma_c_ref");
  if (samples <= 0) throw ConfigError("bve.samples must be positive");
  if (realizations <= 0) throw ConfigError("bve.realizations must be positive");
  if (!std::isfinite(a_s_quench)) throw ConfigError("physics.a_s_quench must be finite");
  if (!std::isfinite(kick_k)) throw ConfigError("physics.kick_k must be finite");
  if (!std::isfinite(trap_center)) throw ConfigError("physics.trap_center must be finite");
}

double derive_g3d(double a_s_bohr, double mass) {
  const double hbar = constants::kHbar;
  return 4.0 * std::numbers::pi * hbar * hbar * (a_s_bohr * constants::kBohrRadius) / mass;
}

double derive_mu3d(const PhysicsConfig& cfg, double g3d) {
  if (!(g3d > 0.0)) {
    throw DerivationDomainError("Thomas-Fermi chemical potential requires g3d > 0");
  }
  const double m = cfg.mass;
  const double inner = 15.0 * cfg.atom_number * g3d * cfg.omega_perp * cfg.omega_perp *
                       cfg.omega_z * std::pow(m / 2.0, 1.5) / (8.0 * std::numbers::pi);
  const double mu_si = std::pow(inner, 0.4);
  return mu_si / (constants::kHbar * cfg.omega_z);
}

double derive_g1d(const PhysicsConfig& cfg, double g3d) {
  if (g3d == 0.0) return 0.0;
  if (g3d < 0.0) return -derive_g1d(cfg, -g3d);
  // g1D = 2^(5/2) / (3N) / sqrt(m w_z^2) * mu3D^(3/2), evaluated in SI.
  const double mu_si = derive_mu3d(cfg, g3d) * constants::kHbar * cfg.omega_z;
  const double g_si = std::pow(2.0, 2.5) / (3.0 * cfg.atom_number) /
                      std::sqrt(cfg.mass * cfg.omega_z * cfg.omega_z) * std::pow(mu_si, 1.5);
  const double l_z = std::sqrt(constants::kHbar / (cfg.mass * cfg.omega_z));
  return g_si / (constants::kHbar * cfg.omega_z * l_z);
}

double mu1d_thomas_fermi(double g1d, double atom_number) {
  return 0.5 * std::pow(1.5 * g1d * atom_number, 2.0 / 3.0);
}

double thomas_fermi_radius(double mu1d) { return std::sqrt(2.0 * mu1d); }

DerivedScales nondimensionalize(const PhysicsConfig& cfg) {
  cfg.validate();
  DerivedScales s;
  s.l_z = std::sqrt(constants::kHbar / (cfg.mass * cfg.omega_z));
  s.energy_unit = constants::kHbar * cfg.omega_z;
  s.time_unit = 1.0 / cfg.omega_z;
  s.g3d_initial = derive_g3d(cfg.a_s_initial, cfg.mass);
  s.g3d_quench = derive_g3d(cfg.a_s_quench, cfg.mass);
  s.g1d_initial = derive_g1d(cfg, s.g3d_initial);
  s.g1d_quench = derive_g1d(cfg, s.g3d_quench);
  s.mu3d = s.g3d_initial > 0.0 ? derive_mu3d(cfg, s.g3d_initial) : 0.0;
  s.mu1d = mu1d_thomas_fermi(s.g1d_initial, cfg.atom_number);
  s.kinetic_E = 0.5 * cfg.kick_k * cfg.kick_k;
  return s;
}

}  // namespace tunnelsim
