#include "tunnelsim/bve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "tunnelsim/error.hpp"
#include "tunnelsim/fft.hpp"

namespace tunnelsim {

namespace {

using cplx = std::complex<double>;

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Inverse CDF over cells of width `width` centred at `centers` with masses `mass`.
class CellSampler {
 public:
  CellSampler(std::vector<double> centers, std::span<const double> mass, double width)
      : centers_(std::move(centers)), cdf_(mass.size()), width_(width) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < mass.size(); ++j) {
      acc += std::max(mass[j], 0.0);
      cdf_[j] = static_cast<double>(acc);
    }
    total_ = cdf_.back();
  }

  double draw(std::mt19937_64& gen) const {
    const double u = uniform01(gen) * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    const auto j = static_cast<std::size_t>(it - cdf_.begin());
    const double lo = j == 0 ? 0.0 : cdf_[j - 1];
    const double cell = cdf_[j] - lo;
    const double frac = cell > 0.0 ? std::clamp((u - lo) / cell, 0.0, 1.0) : 0.5;
    return centers_[j] + (frac - 0.5) * width_;
  }

 private:
  std::vector<double> centers_;
  std::vector<double> cdf_;
  double width_;
  double total_ = 0.0;
};

// exp(-80) ~ 2e-35: the barrier kick per step is far below the resolution of any momentum.
constexpr double kBarrierCutoff = 80.0;

}  // namespace

double kde_bandwidth(double sigma_z, long M) {
  return std::pow(4.0 * std::pow(sigma_z, 5) / (3.0 * static_cast<double>(M)), 0.2);
}

double kde_cell_size(double bandwidth) { return bandwidth / 8.0; }

PhaseSpaceEnsemble sample_initial(const Wavefunction& psi0, double atom_number, double k, long M,
                                  std::uint64_t seed) {
  if (M <= 0) throw SamplingError("sample count must be positive");
  const double norm = psi0.norm();
  if (!(std::abs(norm - atom_number) <= 1e-6 * atom_number)) {
    throw SamplingError("initial wavefunction is not normalized to the atom number (norm " +
                        std::to_string(norm) + ")");
  }
  const Grid& grid = psi0.grid;
  const std::vector<double> rho = psi0.density();
  const CellSampler positions(grid.positions(), rho, grid.dz());

  MomentumDensity mom = momentum_density(psi0);
  for (auto& kk : mom.k) kk += k;
  const CellSampler momenta(std::move(mom.k), mom.density, mom.dk);

  std::mt19937_64 gen(seed);
  PhaseSpaceEnsemble ens;
  ens.seed = seed;
  ens.z.resize(static_cast<std::size_t>(M));
  ens.p.resize(static_cast<std::size_t>(M));
  for (long i = 0; i < M; ++i) {
    ens.z[static_cast<std::size_t>(i)] = positions.draw(gen);
    ens.p[static_cast<std::size_t>(i)] = momenta.draw(gen);
  }
  long double mean = 0.0L, sq = 0.0L;
  for (double z : ens.z) mean += z;
  mean /= static_cast<long double>(M);
  for (double z : ens.z) sq += (z - mean) * (z - mean);
  ens.sigma_z = std::sqrt(static_cast<double>(sq / static_cast<long double>(M)));
  ens.bandwidth = kde_bandwidth(ens.sigma_z, M);
  return ens;
}

double ExternalField::value(double z) const noexcept {
  double v = 0.0;
  if (barrier.V0 != 0.0) {
    const double u = (z - barrier.z0_prime) / barrier.sigma_b;
    const double u2 = u * u;
    if (u2 < kBarrierCutoff) v += barrier.V0 * std::exp(-u2);
  }
  if (trap_omega != 0.0) {
    const double d = z - trap_center;
    v += 0.5 * trap_omega * trap_omega * d * d;
  }
  return v;
}

double ExternalField::force(double z) const noexcept {
  double f = 0.0;
  if (barrier.V0 != 0.0) {
    const double u = (z - barrier.z0_prime) / barrier.sigma_b;
    const double u2 = u * u;
    if (u2 < kBarrierCutoff) f += 2.0 * u / barrier.sigma_b * barrier.V0 * std::exp(-u2);
  }
  if (trap_omega != 0.0) f -= trap_omega * trap_omega * (z - trap_center);
  return f;
}

struct KdeForce::Impl {
  Grid grid;
  double bandwidth;
  FftWorkspace fft;
  std::vector<cplx> derivative_kernel;
  std::vector<double> gradient;

  Impl(const Grid& g, double nu)
      : grid(g), bandwidth(nu), fft(g.size()), derivative_kernel(g.size()), gradient(g.size()) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double k = g.k(j);
      derivative_kernel[j] = cplx(0.0, k) * std::exp(-0.5 * k * k * nu * nu);
    }
  }
};

KdeForce::KdeForce(const Grid& grid, double bandwidth)
    : impl_(std::make_unique<Impl>(grid, bandwidth)) {}
KdeForce::~KdeForce() = default;
KdeForce::KdeForce(KdeForce&&) noexcept = default;
KdeForce& KdeForce::operator=(KdeForce&&) noexcept = default;

const Grid& KdeForce::grid() const noexcept { return impl_->grid; }

namespace {

// Cloud-in-cell weights; throws when a sample is not strictly inside the grid.
inline void cic_index(const Grid& grid, double z, std::size_t& j, double& w) {
  const double x = (z - grid.z_min()) / grid.dz();
  if (!(x >= 0.0) || !(x < static_cast<double>(grid.size() - 1))) {
    throw DomainError("classical sample at z = " + std::to_string(z) + " left the grid",
                      x < 0.0 ? -1 : 1);
  }
  const double f = std::floor(x);
  j = static_cast<std::size_t>(f);
  w = x - f;
}

void deposit(const Grid& grid, std::span<const double> z, std::span<cplx> out) {
  std::ranges::fill(out, cplx{});
  const double weight = 1.0 / (static_cast<double>(z.size()) * grid.dz());
  for (double zi : z) {
    std::size_t j;
    double w;
    cic_index(grid, zi, j, w);
    out[j] += (1.0 - w) * weight;
    out[j + 1] += w * weight;
  }
}

}  // namespace

void KdeForce::force(std::span<const double> z, double coupling, std::span<double> out) {
  Impl& s = *impl_;
  auto data = s.fft.data();
  deposit(s.grid, z, data);
  s.fft.forward();
  for (std::size_t j = 0; j < data.size(); ++j) data[j] *= s.derivative_kernel[j];
  s.fft.backward();
  for (std::size_t j = 0; j < data.size(); ++j) s.gradient[j] = data[j].real();
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::size_t j;
    double w;
    cic_index(s.grid, z[i], j, w);
    out[i] = -coupling * ((1.0 - w) * s.gradient[j] + w * s.gradient[j + 1]);
  }
}

void KdeForce::force_direct(std::span<const double> z, double bandwidth, double coupling,
                            std::span<double> out) {
  const double inv_nu2 = 1.0 / (bandwidth * bandwidth);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth *
                             static_cast<double>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) {
    long double slope = 0.0L;
    for (double zk : z) {
      const double u = z[i] - zk;
      slope += -u * inv_nu2 * std::exp(-0.5 * u * u * inv_nu2);
    }
    out[i] = -coupling * norm * static_cast<double>(slope);
  }
}

std::vector<double> kde_density(const PhaseSpaceEnsemble& ensemble, const Grid& grid) {
  FftWorkspace fft(grid.size());
  auto data = fft.data();
  deposit(grid, ensemble.z, data);
  fft.forward();
  const double nu = ensemble.bandwidth;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double k = grid.k(j);
    data[j] *= std::exp(-0.5 * k * k * nu * nu);
  }
  fft.backward();
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = data[j].real();
  return f;
}

std::vector<double> kde_density_direct(const PhaseSpaceEnsemble& ensemble, const Grid& grid) {
  const double nu = ensemble.bandwidth;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * nu *
                             static_cast<double>(ensemble.size()));
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    long double s = 0.0L;
    for (double zi : ensemble.z) {
      const double u = (grid.z(j) - zi) / nu;
      s += std::exp(-0.5 * u * u);
    }
    f[j] = static_cast<double>(s) * norm;
  }
  return f;
}

std::vector<double> mean_field_potential(const PhaseSpaceEnsemble& ensemble, const Grid& grid,
                                         double g1d, double atom_number) {
  std::vector<double> v = kde_density(ensemble, grid);
  for (auto& x : v) x *= atom_number * g1d;
  return v;
}

PhaseSpaceEnsemble evolve_ensemble(PhaseSpaceEnsemble ens, const ExternalField& field, double g1d,
                                   double atom_number, const BveOptions& options,
                                   const EnsembleObserver& observer) {
  const std::size_t M = ens.size();
  const double dt = options.dt;
  if (!(dt > 0.0)) throw StepSizeError("time step must be positive");
  if (ens.p.size() != M) throw ConfigError("ensemble position/momentum size mismatch");
  const Grid& grid = options.grid;
  if (grid.size() < 2) throw ConfigError("classical evolution needs a domain grid");
  const double coupling = atom_number * g1d;

  std::optional<KdeForce> kde;
  if (coupling != 0.0) kde.emplace(grid, ens.bandwidth);
  std::vector<double> force(M), mean_field(M);

  auto compute_force = [&](long step) {
    for (std::size_t i = 0; i < M; ++i) force[i] = field.force(ens.z[i]);
    if (kde) {
      kde->force(ens.z, coupling, mean_field);
      for (std::size_t i = 0; i < M; ++i) force[i] += mean_field[i];
    }
    for (std::size_t i = 0; i < M; ++i) {
      if (!std::isfinite(force[i])) {
        throw DivergenceError("non-finite classical force at step " + std::to_string(step), step);
      }
    }
  };

  const double t0 = ens.time;
  auto emit = [&](long step) -> bool {
    const double lo = grid.z_min();
    const double hi = grid.z_max() - grid.dz();
    for (double z : ens.z) {
      if (!(z >= lo && z < hi)) {
        throw DomainError("classical sample at z = " + std::to_string(z) + " left the grid",
                          z < lo ? -1 : 1);
      }
    }
    ens.time = t0 + static_cast<double>(step) * dt;
    if (!observer) return true;
    long double e = 0.0L;
    for (std::size_t i = 0; i < M; ++i) e += 0.5 * ens.p[i] * ens.p[i] + field.value(ens.z[i]);
    EnsembleSnapshot snap{ens.time, step, &ens, static_cast<double>(e / static_cast<long double>(M))};
    return observer(snap);
  };

  const long total_steps = std::lround(options.t_final / dt);
  const long stride = std::max<long>(1, options.observer_every);
  compute_force(0);
  bool keep_going = emit(0);
  long step = 0;
  while (keep_going && step < total_steps) {
    const long block = std::min(stride, total_steps - step);
    for (long s = 0; s < block; ++s) {
      for (std::size_t i = 0; i < M; ++i) {
        ens.p[i] += 0.5 * dt * force[i];
        ens.z[i] += dt * ens.p[i];
      }
      compute_force(step + s + 1);
      for (std::size_t i = 0; i < M; ++i) ens.p[i] += 0.5 * dt * force[i];
    }
    step += block;
    keep_going = emit(step);
  }
  ens.time = t0 + static_cast<double>(step) * dt;
  return ens;
}

}  // namespace tunnelsim
