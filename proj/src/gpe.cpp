#include "tunnelsim/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tunnelsim/error.hpp"
#include "tunnelsim/fft.hpp"

namespace tunnelsim {

namespace {

using cplx = std::complex<double>;

long double sum_density(std::span<const cplx> values) {
  long double s = 0.0L;
  for (const auto& v : values) s += std::norm(v);
  return s;
}

void check_sizes(const Grid& grid, std::size_t values, std::size_t potential) {
  if (values != grid.size() || potential != grid.size()) {
    throw ConfigError("field and potential sizes must match the grid");
  }
}

// Spectral sums dz/n * sum k^p |psi_k|^2 Gathered in one forward transform.
struct SpectralMoments {
  double first = 0.0;
  double second = 0.0;
};

SpectralMoments spectral_moments(const Grid& grid, std::span<const cplx> values) {
  FftWorkspace fft(grid.size());
  std::ranges::copy(values, fft.data().begin());
  fft.forward();
  long double m1 = 0.0L, m2 = 0.0L;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid.k(j);
    const double w = std::norm(fft.data()[j]);
    m1 += k * w;
    m2 += k * k * w;
  }
  const double scale = grid.dz() / static_cast<double>(grid.size());
  return {static_cast<double>(m1) * scale, static_cast<double>(m2) * scale};
}

EnergyParts energy_raw(const Grid& grid, std::span<const cplx> values,
                       std::span<const double> potential, double g1d) {
  EnergyParts e;
  e.kinetic = 0.5 * spectral_moments(grid, values).second;
  long double pot = 0.0L, inter = 0.0L;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double rho = std::norm(values[j]);
    pot += potential[j] * rho;
    inter += rho * rho;
  }
  e.potential = static_cast<double>(pot) * grid.dz();
  e.interaction = 0.5 * g1d * static_cast<double>(inter) * grid.dz();
  return e;
}

}  // namespace

double Wavefunction::norm() const { return static_cast<double>(sum_density(values)) * grid.dz(); }

std::vector<double> Wavefunction::density() const {
  std::vector<double> rho(values.size());
  std::ranges::transform(values, rho.begin(), [](const cplx& v) { return std::norm(v); });
  return rho;
}

Wavefunction Wavefunction::embedded_in(const Grid& outer) const {
  const std::size_t offset = grid.offset_in(outer);
  Wavefunction out{outer, std::vector<cplx>(outer.size(), cplx{}), time};
  std::ranges::copy(values, out.values.begin() + static_cast<long>(offset));
  return out;
}

double mean_position(const Wavefunction& psi) {
  long double s = 0.0L, w = 0.0L;
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    const double rho = std::norm(psi.values[j]);
    s += rho * psi.grid.z(j);
    w += rho;
  }
  return static_cast<double>(s / w);
}

double rms_width(const Wavefunction& psi) {
  const double mean = mean_position(psi);
  long double s = 0.0L, w = 0.0L;
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    const double rho = std::norm(psi.values[j]);
    const double d = psi.grid.z(j) - mean;
    s += rho * d * d;
    w += rho;
  }
  return std::sqrt(static_cast<double>(s / w));
}

double mean_momentum(const Wavefunction& psi) {
  return spectral_moments(psi.grid, psi.values).first / psi.norm();
}

EnergyParts energy_functional(const Wavefunction& psi, std::span<const double> potential,
                              double g1d) {
  check_sizes(psi.grid, psi.values.size(), potential.size());
  return energy_raw(psi.grid, psi.values, potential, g1d);
}

MomentumDensity momentum_density(const Wavefunction& psi) {
  const Grid& grid = psi.grid;
  const std::size_t n = grid.size();
  FftWorkspace fft(n);
  std::ranges::copy(psi.values, fft.data().begin());
  fft.forward();
  MomentumDensity out;
  out.dk = 2.0 * std::numbers::pi / grid.span();
  out.k.resize(n);
  out.density.resize(n);
  // psi~(k) = dz / sqrt(2 pi) * exp(-i k z_min) * FFT_k ; the phase drops out of |.|^2.
  const double scale = grid.dz() * grid.dz() / (2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + n / 2) % n;  // ascending k
    out.k[i] = grid.k(j);
    out.density[i] = std::norm(fft.data()[j]) * scale;
  }
  return out;
}

GroundState ground_state(const Grid& grid, std::span<const double> trap, double g1d,
                         double atom_number, const GroundStateOptions& options) {
  const std::size_t n = grid.size();
  check_sizes(grid, n, trap.size());
  if (g1d < 0.0) throw ConfigError("ground state requires a non-negative coupling");
  if (!(options.tolerance > 0.0) || !(options.dtau > 0.0)) {
    throw ConfigError("ground-state tolerance and dtau must be positive");
  }
  const double dtau = options.dtau;

  const auto min_it = std::ranges::min_element(trap);
  const double v_min = *min_it;
  const double center = grid.z(static_cast<std::size_t>(min_it - trap.begin()));

  Wavefunction psi{grid, std::vector<cplx>(n), 0.0};
  const double mu_guess = g1d > 0.0 ? 0.5 * std::pow(1.5 * g1d * atom_number, 2.0 / 3.0) : 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = grid.z(j) - center;
    double amp = std::exp(-0.5 * d * d);
    if (g1d > 0.0) amp += std::sqrt(std::max(mu_guess - (trap[j] - v_min), 0.0) / g1d);
    psi.values[j] = amp;
  }
  {
    const double s = std::sqrt(atom_number / psi.norm());
    for (auto& v : psi.values) v *= s;
  }

  std::vector<double> half_kinetic(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.k(j);
    half_kinetic[j] = std::exp(-0.25 * k * k * dtau);
  }
  // Interaction picture psi = e^{-(V - s) tau} phi with the shift s tracking mu,
  // so the norm, and with it the nonlinear term, stays nearly constant inside a step.
  std::vector<double> base_half(n);
  for (std::size_t j = 0; j < n; ++j) base_half[j] = std::exp(-0.5 * (trap[j] - v_min) * dtau);

  FftWorkspace fft(n);
  auto data = fft.data();
  auto kinetic_half_step = [&] {
    fft.forward();
    for (std::size_t j = 0; j < n; ++j) data[j] *= half_kinetic[j];
    fft.backward();
  };

  GroundState result;
  std::ranges::copy(psi.values, data.begin());
  double mu_prev = 0.0;
  double shift = v_min + mu_guess;
  const double ln_n = std::log(atom_number);
  for (long it = 1; it <= options.max_iterations; ++it) {
    kinetic_half_step();
    const double lift = std::exp(0.5 * (shift - v_min) * dtau);
    if (g1d != 0.0) {
      // d phi / d tau = -g e^{-2 (V - s) tau} |phi|^2 phi.
      for (std::size_t j = 0; j < n; ++j) {
        const double half = base_half[j] * lift;
        const double full = half * half;
        const cplx phi0 = data[j];
        auto rhs = [&](const cplx& phi, double weight) { return -g1d * weight * std::norm(phi) * phi; };
        const cplx k1 = rhs(phi0, 1.0);
        const cplx k2 = rhs(phi0 + 0.5 * dtau * k1, full);
        const cplx k3 = rhs(phi0 + 0.5 * dtau * k2, full);
        const cplx k4 = rhs(phi0 + dtau * k3, full * full);
        data[j] = full * (phi0 + dtau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const double half = base_half[j] * lift;
        data[j] *= half * half;
      }
    }
    kinetic_half_step();

    const double norm = static_cast<double>(sum_density(data)) * grid.dz();
    if (!std::isfinite(norm) || !(norm > 0.0)) {
      throw SolverError("imaginary-time propagation produced a non-finite norm", norm);
    }
    const double mu = shift - (std::log(norm) - ln_n) / (2.0 * dtau);
    const double s = std::sqrt(atom_number / norm);
    for (auto& v : data) v *= s;

    if (options.record_energy) {
      const EnergyParts e = energy_raw(grid, data, trap, g1d);
      result.energy_history.push_back(e.total() / atom_number);
    }
    const double drift = std::abs(mu - mu_prev) / std::max(std::abs(mu), 1e-300);
    mu_prev = mu;
    shift = mu;
    if (it > 1 && drift < options.tolerance) {
      result.mu = mu;
      result.iterations = it;
      psi.values.assign(data.begin(), data.end());
      // Real up to roundoff: drop the imaginary residue and renormalize.
      for (auto& v : psi.values) v = cplx(v.real(), 0.0);
      const double r = std::sqrt(atom_number / psi.norm());
      for (auto& v : psi.values) v *= r;
      result.psi = std::move(psi);
      return result;
    }
    if (it == options.max_iterations) {
      throw SolverError("imaginary-time propagation did not converge; relative mu drift " +
                            std::to_string(drift),
                        drift);
    }
  }
  throw SolverError("imaginary-time propagation did not run", 0.0);
}

Wavefunction apply_kick(Wavefunction psi, double k) {
  if (k == 0.0) return psi;
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    psi.values[j] *= std::polar(1.0, k * psi.grid.z(j));
  }
  return psi;
}

Wavefunction evolve(Wavefunction psi, std::span<const double> external, double g1d,
                    const EvolveOptions& options, const Observer& observer) {
  const Grid grid = psi.grid;
  const std::size_t n = grid.size();
  check_sizes(grid, psi.values.size(), external.size());
  const double dt = options.dt;
  if (!(dt > 0.0)) throw StepSizeError("time step must be positive");

  double v_max = 0.0;
  for (double v : external) v_max = std::max(v_max, std::abs(v));
  double rho_max = 0.0;
  for (const auto& v : psi.values) rho_max = std::max(rho_max, std::norm(v));
  constexpr double kMaxPhasePerStep = 0.5;
  if (v_max * dt > kMaxPhasePerStep || std::abs(g1d) * rho_max * dt > kMaxPhasePerStep) {
    throw StepSizeError("dt too large: local phase per step exceeds 0.5 rad (max V = " +
                        std::to_string(v_max) + ", max |g| rho = " +
                        std::to_string(std::abs(g1d) * rho_max) + ")");
  }

  // Split-step Fourier with a cubic term goes unstable once the kinetic phase of
  // the highest mode exceeds pi (resonant coupling of grid modes).
  const double kinetic_phase = 0.5 * grid.k_max() * grid.k_max() * dt;
  if (g1d != 0.0 && kinetic_phase > std::numbers::pi) {
    throw StepSizeError("dt too large for this grid: k_max^2 dt / 2 = " +
                        std::to_string(kinetic_phase) + " exceeds pi");
  }

  const double norm0 = psi.norm();
  const long total_steps = std::lround(options.t_final / dt);
  const long stride = std::max<long>(1, options.observer_every);
  const auto margin_points = std::min<std::size_t>(
      n / 2, static_cast<std::size_t>(std::ceil(options.edge_margin / grid.dz())));

  std::vector<cplx> half(n), full(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.k(j);
    half[j] = std::polar(1.0, -0.25 * k * k * dt);
    full[j] = std::polar(1.0, -0.5 * k * k * dt);
  }
  std::vector<cplx> static_phase;
  if (g1d == 0.0) {
    static_phase.resize(n);
    for (std::size_t j = 0; j < n; ++j) static_phase[j] = std::polar(1.0, -external[j] * dt);
  }

  FftWorkspace fft(n);
  auto data = fft.data();
  std::ranges::copy(psi.values, data.begin());
  const double t0 = psi.time;

  auto emit = [&](long step) -> bool {
    const long double total = sum_density(data);
    const double norm = static_cast<double>(total) * grid.dz();
    if (!std::isfinite(norm)) {
      throw DivergenceError("non-finite field at step " + std::to_string(step), step);
    }
    if (std::abs(norm - norm0) > options.norm_tolerance * norm0) {
      throw StepSizeError("norm drift " + std::to_string(std::abs(norm - norm0) / norm0) +
                          " exceeds tolerance at step " + std::to_string(step));
    }
    long double lo = 0.0L, hi = 0.0L;
    for (std::size_t j = 0; j < margin_points; ++j) {
      lo += std::norm(data[j]);
      hi += std::norm(data[n - 1 - j]);
    }
    const long double limit = options.edge_mass_tolerance * total;
    if (lo > limit || hi > limit) {
      const int side = lo > limit ? -1 : 1;
      throw DomainError(std::string("density reached the ") + (side < 0 ? "lower" : "upper") +
                            " grid edge at t = " + std::to_string(t0 + step * dt),
                        side);
    }
    if (!observer) return true;
    const EnergyParts e = energy_raw(grid, data, external, g1d);
    Snapshot snap{t0 + static_cast<double>(step) * dt, step, &grid, data, norm, e.total() / norm0};
    return observer(snap);
  };

  long step = 0;
  bool keep_going = emit(0);
  while (keep_going && step < total_steps) {
    const long block = std::min(stride, total_steps - step);
    fft.forward();
    for (std::size_t j = 0; j < n; ++j) data[j] *= half[j];
    fft.backward();
    for (long s = 0; s < block; ++s) {
      if (g1d == 0.0) {
        for (std::size_t j = 0; j < n; ++j) data[j] *= static_phase[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          data[j] *= std::polar(1.0, -(external[j] + g1d * std::norm(data[j])) * dt);
        }
      }
      fft.forward();
      const auto& kin = (s == block - 1) ? half : full;
      for (std::size_t j = 0; j < n; ++j) data[j] *= kin[j];
      fft.backward();
    }
    step += block;
    keep_going = emit(step);
  }

  psi.values.assign(data.begin(), data.end());
  psi.time = t0 + static_cast<double>(step) * dt;
  return psi;
}

std::vector<double> effective_potential(const Wavefunction& psi, std::span<const double> barrier,
                                        double g1d) {
  check_sizes(psi.grid, psi.values.size(), barrier.size());
  std::vector<double> v(barrier.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = barrier[j] + g1d * std::norm(psi.values[j]);
  return v;
}

}  // namespace tunnelsim
