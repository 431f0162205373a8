#include "tunnelsim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "tunnelsim/error.hpp"

namespace tunnelsim {

void GridSettings::validate() const {
  if (!(z_max > z_min)) throw ConfigError("grid.z_max must exceed grid.z_min");
  if (!is_power_of_two(n_points)) throw ConfigError("grid.n_points must be a power of two");
  if (!is_power_of_two(ground_state_points)) {
    throw ConfigError("grid.ground_state_points must be a power of two");
  }
  if (!(dt > 0.0)) throw ConfigError("grid.dt must be positive");
  if (observer_every <= 0) throw ConfigError("grid.observer_every must be positive");
  if (t_cap && !(*t_cap > 0.0)) throw ConfigError("grid.t_cap must be positive");
  if (!(ground_state_dtau > 0.0)) throw ConfigError("grid.ground_state_dtau must be positive");
  if (!(ground_state_tolerance > 0.0)) {
    throw ConfigError("grid.ground_state_tolerance must be positive");
  }
}

InitialState prepare_initial_state(const PhysicsConfig& cfg, const GridSettings& settings) {
  settings.validate();
  InitialState init;
  init.physics = cfg;
  init.scales = nondimensionalize(cfg);
  init.grid = settings.grid();
  const Grid& grid = init.grid;

  const std::size_t n = grid.size();
  const std::size_t m = std::min(settings.ground_state_points, n);
  const double jc = std::round((cfg.trap_center - grid.z_min()) / grid.dz());
  const double first = std::clamp(jc - static_cast<double>(m / 2), 0.0, static_cast<double>(n - m));
  const Grid window = grid.window(static_cast<std::size_t>(first), m);

  const std::vector<double> trap = harmonic_potential(window, cfg.trap_center);
  GroundStateOptions opts;
  opts.dtau = settings.ground_state_dtau;
  opts.tolerance = settings.ground_state_tolerance;
  GroundState gs = ground_state(window, trap, init.scales.g1d_initial, cfg.atom_number, opts);
  gs.psi = gs.psi.embedded_in(grid);
  init.scales.sigma_c = rms_width(gs.psi);
  init.ground = std::move(gs);
  return init;
}

BarrierSpec barrier_for(const PhysicsConfig& cfg, double V0_over_E, double sigma_b) {
  const double E = 0.5 * cfg.kick_k * cfg.kick_k;
  BarrierSpec b = make_barrier(V0_over_E * E, sigma_b, cfg.trap_center, cfg.sigma_c_ref);
  return b;
}

double quench_coupling(const PhysicsConfig& cfg, double a_s_bohr) {
  return derive_g1d(cfg, derive_g3d(a_s_bohr, cfg.mass));
}

Grid kde_grid(const Grid& domain, double bandwidth) {
  const double target = kde_cell_size(bandwidth);
  const auto cells = static_cast<std::size_t>(std::ceil(domain.span() / target));
  return Grid(domain.z_min(), domain.z_max(), next_power_of_two(std::max<std::size_t>(cells, 2)));
}

namespace {

// Fraction of N inside twice the edge margin that triggers a grid extension.
constexpr double kEdgeWatch = 1e-12;

// Doubles the point count; covering() keeps a spacing of slack on each side.
Grid extend(const Grid& g, int side) {
  const double add = g.span() - 2.0 * g.dz();
  const double lo = side <= 0 ? g.z_min() - add : g.z_min();
  const double hi = side >= 0 ? g.z_max() + add : g.z_max();
  return g.covering(lo, hi);
}

StopOptions with_cap(const StopOptions& stop, const InitialState& init, const BarrierSpec& barrier,
                     const GridSettings& settings) {
  StopOptions so = stop;
  so.t_cap = settings.t_cap.value_or(default_stop_cap(
      init.physics.trap_center, init.physics.sigma_c_ref, init.physics.kick_k, barrier));
  return so;
}

// The barrier tails and the transmitted region must lie inside the periodic domain.
Grid covering_barrier(const Grid& g, const BarrierSpec& b, double margin) {
  return g.covering(b.z0_prime - 6.0 * b.sigma_b, std::max(b.z0_prime + 6.0 * b.sigma_b, b.z_T() + 2.0 * margin));
}

double run_length(double t_cap, const GridSettings& s) {
  const double block = s.dt * static_cast<double>(s.observer_every);
  return std::ceil(t_cap / block - 1e-9) * block;
}

}  // namespace

RunOutcome run_gpe(const InitialState& init, const BarrierSpec& barrier, double g1d,
                   const GridSettings& settings, const StopOptions& stop, const Observer& hook) {
  barrier.validate();
  const double N = init.physics.atom_number;
  const StopOptions so = with_cap(stop, init, barrier, settings);
  const double t_end = run_length(so.t_cap, settings);
  EvolveOptions eo;
  eo.dt = settings.dt;
  eo.observer_every = settings.observer_every;
  eo.edge_margin = settings.edge_margin;

  Grid grid = covering_barrier(init.grid, barrier, settings.edge_margin);
  for (int attempt = 0;; ++attempt) {
    Wavefunction psi = grid == init.grid ? init.ground.psi : init.ground.psi.embedded_in(grid);
    psi.time = 0.0;
    psi = apply_kick(std::move(psi), init.physics.kick_k);
    StopMonitor monitor(N, so);
    int extensions = attempt;
    double last_t = -1.0;
    try {
      for (;;) {
        const std::vector<double> v = gaussian_barrier(grid, barrier);
        const std::size_t n = grid.size();
        const auto watch = std::min<std::size_t>(
            n / 4, static_cast<std::size_t>(std::ceil(2.0 * settings.edge_margin / grid.dz())));
        int grow = 0;
        auto observer = [&](const Snapshot& snap) {
          if (snap.t <= last_t) return true;
          last_t = snap.t;
          if (hook && !hook(snap)) return false;
          monitor.update(snap.t, region_counts(*snap.grid, snap.psi, barrier, so.t_cap - snap.t));
          if (monitor.done()) return false;
          if (extensions < settings.max_grid_extensions) {
            long double lo = 0.0L, hi = 0.0L;
            for (std::size_t j = 0; j < watch; ++j) {
              lo += std::norm(snap.psi[j]);
              hi += std::norm(snap.psi[n - 1 - j]);
            }
            const long double limit = kEdgeWatch * snap.norm / grid.dz();
            if (lo > limit || hi > limit) {
              grow = lo > limit ? -1 : 1;
              return false;
            }
          }
          return true;
        };
        eo.t_final = t_end - psi.time;
        psi = evolve(std::move(psi), v, g1d, eo, observer);
        if (grow == 0) break;
        grid = extend(grid, grow);
        psi = psi.embedded_in(grid);
        ++extensions;
      }
    } catch (const DomainError& e) {
      if (attempt >= settings.max_grid_extensions) throw;
      grid = extend(grid, e.side());
      continue;
    }
    RunOutcome out{measure(monitor, Source::kGpe), monitor.diagnostics(), grid};
    return out;
  }
}

RunOutcome run_bve(const InitialState& init, const BarrierSpec& barrier, double g1d, long M,
                   std::uint64_t seed, const GridSettings& settings, const StopOptions& stop,
                   const EnsembleObserver& hook) {
  barrier.validate();
  const double N = init.physics.atom_number;
  const StopOptions so = with_cap(stop, init, barrier, settings);
  const double t_end = run_length(so.t_cap, settings);
  const PhaseSpaceEnsemble ens0 =
      sample_initial(init.ground.psi, N, init.physics.kick_k, M, seed);

  Grid domain = covering_barrier(init.grid, barrier, settings.edge_margin);
  for (int attempt = 0;; ++attempt) {
    PhaseSpaceEnsemble ens = ens0;
    StopMonitor monitor(N, so);
    int extensions = attempt;
    double last_t = -1.0;
    try {
      for (;;) {
        BveOptions bo;
        bo.dt = settings.dt;
        bo.t_final = t_end - ens.time;
        bo.observer_every = settings.observer_every;
        bo.grid = g1d != 0.0 ? kde_grid(domain, ens0.bandwidth) : domain;
        const double lo = domain.z_min() + settings.edge_margin;
        const double hi = domain.z_max() - settings.edge_margin;
        int grow = 0;
        auto observer = [&](const EnsembleSnapshot& snap) {
          if (snap.t <= last_t) return true;
          last_t = snap.t;
          if (hook && !hook(snap)) return false;
          monitor.update(snap.t, region_counts(snap.ensemble->z, snap.ensemble->p, barrier, N,
                                               so.t_cap - snap.t));
          if (monitor.done()) return false;
          if (extensions < settings.max_grid_extensions) {
            const auto [mn, mx] = std::ranges::minmax(snap.ensemble->z);
            if (mn < lo || mx > hi) {
              grow = mn < lo ? -1 : 1;
              return false;
            }
          }
          return true;
        };
        ens = evolve_ensemble(std::move(ens), ExternalField{barrier}, g1d, N, bo, observer);
        if (grow == 0) break;
        domain = extend(domain, grow);
        ++extensions;
      }
    } catch (const DomainError& e) {
      if (attempt >= settings.max_grid_extensions) throw;
      domain = extend(domain, e.side());
      continue;
    }
    RunOutcome out{measure(monitor, Source::kBve), monitor.diagnostics(), domain};
    out.result.seed = static_cast<std::int64_t>(seed);
    return out;
  }
}

}  // namespace tunnelsim
