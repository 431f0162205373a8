#include "tunnelsim/breathing.hpp"

#include <cmath>
#include <string>

#include "tunnelsim/bve.hpp"
#include "tunnelsim/error.hpp"
#include "tunnelsim/gpe.hpp"
#include "tunnelsim/potentials.hpp"

namespace tunnelsim {

void BreathingOptions::validate() const {
  if (!(quench > 0.0)) throw ConfigError("breathing quench factor must be positive");
  if (!(dt > 0.0) || !(duration > dt)) throw ConfigError("breathing dt/duration are inconsistent");
  if (!(sample_every >= dt)) throw ConfigError("breathing sample interval must be at least dt");
  if (!is_power_of_two(grid_points)) throw ConfigError("breathing grid must be a power of two");
  if (!(span > 0.0)) throw ConfigError("breathing span must be positive");
  if (samples < 2) throw ConfigError("breathing needs at least two samples");
}

namespace {

BreathingMode fit_mode(std::vector<double> t, std::vector<double> w, double omega,
                       const char* solver) {
  BreathingMode mode;
  try {
    mode.fit = fit_sinusoid(t, w, 1.2 * omega, 2.8 * omega);
  } catch (const FitError& e) {
    throw ValidationError(std::string("breathing fit failed for ") + solver + ": " + e.what());
  }
  mode.frequency = std::abs(mode.fit.params[3]);
  mode.ratio = mode.frequency / omega;
  mode.t = std::move(t);
  mode.width_sq = std::move(w);
  return mode;
}

double centred_second_moment(std::span<const double> z) {
  double m = 0.0;
  for (double v : z) m += v;
  m /= static_cast<double>(z.size());
  double s = 0.0;
  for (double v : z) s += (v - m) * (v - m);
  return s / static_cast<double>(z.size());
}

}  // namespace

BreathingResult breathing_mode_test(const PhysicsConfig& cfg, const GridSettings& settings,
                                    const BreathingOptions& options) {
  cfg.validate();
  settings.validate();
  options.validate();
  const double N = cfg.atom_number;
  const double g = quench_coupling(cfg, options.a_s.value_or(cfg.a_s_initial));
  if (g < 0.0) throw ConfigError("breathing test needs a non-negative scattering length");

  const double half = 0.5 * options.span;
  const Grid grid(cfg.trap_center - half, cfg.trap_center + half, options.grid_points);

  GroundStateOptions gso;
  gso.dtau = settings.ground_state_dtau;
  gso.tolerance = settings.ground_state_tolerance;
  GroundState gs = ground_state(grid, harmonic_potential(grid, cfg.trap_center), g, N, gso);

  BreathingResult out;
  out.g1d = g;
  out.omega_after = options.quench;
  out.mu = gs.mu;
  const long stride = std::max(1L, std::lround(options.sample_every / options.dt));

  if (options.gpe) {
    EvolveOptions eo;
    eo.dt = options.dt;
    eo.t_final = options.duration;
    eo.observer_every = stride;
    const std::vector<double> trap = harmonic_potential(grid, cfg.trap_center, options.quench);
    std::vector<double> t, w;
    evolve(gs.psi, trap, g, eo, [&](const Snapshot& s) {
      double n = 0.0, m1 = 0.0, m2 = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double r = std::norm(s.psi[j]);
        const double z = grid.z(j) - cfg.trap_center;
        n += r;
        m1 += r * z;
        m2 += r * z * z;
      }
      m1 /= n;
      t.push_back(s.t);
      w.push_back(m2 / n - m1 * m1);
      return true;
    });
    out.gpe = fit_mode(std::move(t), std::move(w), options.quench, "gpe");
  }

  if (options.bve) {
    PhaseSpaceEnsemble ens = sample_initial(gs.psi, N, 0.0, options.samples, options.seed);
    BveOptions bo;
    bo.dt = options.dt;
    bo.t_final = options.duration;
    bo.observer_every = stride;
    bo.grid = g != 0.0 ? kde_grid(grid, ens.bandwidth) : grid;
    ExternalField field;
    field.trap_omega = options.quench;
    field.trap_center = cfg.trap_center;
    std::vector<double> t, w;
    evolve_ensemble(std::move(ens), field, g, N, bo, [&](const EnsembleSnapshot& s) {
      t.push_back(s.t);
      w.push_back(centred_second_moment(s.ensemble->z));
      return true;
    });
    out.bve = fit_mode(std::move(t), std::move(w), options.quench, "bve");
  }
  return out;
}

}  // namespace tunnelsim
