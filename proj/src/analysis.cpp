#include "tunnelsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tunnelsim/error.hpp"
#include "tunnelsim/fft.hpp"

namespace tunnelsim {

std::string_view to_string(Source s) noexcept { return s == Source::kGpe ? "GPE" : "BVE"; }

Source parse_source(std::string_view s) {
  if (s == "GPE") return Source::kGpe;
  if (s == "BVE") return Source::kBve;
  throw SchemaError("unknown source tag '" + std::string(s) + "'");
}

double integrate_linear(const Grid& grid, std::span<const double> density, double a, double b) {
  const std::size_t n = grid.size();
  if (density.size() != n) throw ConfigError("density does not match grid");
  const double dz = grid.dz();
  const double lo = std::max(a, grid.z(0));
  const double hi = std::min(b, grid.z(n - 1));
  if (!(hi > lo)) return 0.0;

  auto cell_part = [&](std::size_t j, double s0, double s1) -> long double {
    const long double r0 = density[j];
    const long double dr = static_cast<long double>(density[j + 1]) - r0;
    return dz * (r0 * (s1 - s0) + 0.5L * dr * (s1 * s1 - s0 * s0));
  };

  const double x_lo = (lo - grid.z_min()) / dz;
  const double x_hi = (hi - grid.z_min()) / dz;
  auto j_lo = static_cast<std::size_t>(std::floor(x_lo));
  auto j_hi = static_cast<std::size_t>(std::floor(x_hi));
  j_lo = std::min(j_lo, n - 2);
  j_hi = std::min(j_hi, n - 2);
  const double s_lo = x_lo - static_cast<double>(j_lo);
  const double s_hi = x_hi - static_cast<double>(j_hi);
  if (j_lo == j_hi) return static_cast<double>(cell_part(j_lo, s_lo, s_hi));

  long double sum = cell_part(j_lo, s_lo, 1.0);
  for (std::size_t j = j_lo + 1; j < j_hi; ++j) {
    sum += 0.5L * dz * (static_cast<long double>(density[j]) + density[j + 1]);
  }
  sum += cell_part(j_hi, 0.0, s_hi);
  return static_cast<double>(sum);
}

namespace {

bool heading_in(double z, double v, double horizon, double zr, double zt) {
  if (z < zr) return v > 0.0 && z + v * horizon >= zr;
  if (z > zt) return v < 0.0 && z + v * horizon <= zt;
  return false;
}

}  // namespace

RegionCounts region_counts(const Grid& grid, std::span<const std::complex<double>> psi,
                           const BarrierSpec& barrier, double horizon) {
  const std::size_t n = psi.size();
  std::vector<double> rho(n);
  for (std::size_t j = 0; j < n; ++j) rho[j] = std::norm(psi[j]);
  const double inf = std::numeric_limits<double>::infinity();
  RegionCounts c;
  c.n_t = integrate_linear(grid, rho, barrier.z_T(), inf);
  c.n_r = integrate_linear(grid, rho, -inf, barrier.z_R());
  c.n_lost = integrate_linear(grid, rho, barrier.z_R(), barrier.z_T());
  if (horizon > 0.0) {
    FftWorkspace fft(n);
    auto d = fft.data();
    std::ranges::copy(psi, d.begin());
    fft.forward();
    for (std::size_t j = 0; j < n; ++j) d[j] *= std::complex<double>(0.0, grid.k(j));
    fft.backward();
    long double incoming = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (rho[j] == 0.0) continue;
      const double v = (std::conj(psi[j]) * d[j]).imag() / rho[j];
      if (heading_in(grid.z(j), v, horizon, barrier.z_R(), barrier.z_T())) incoming += rho[j];
    }
    c.n_incoming = static_cast<double>(incoming) * grid.dz();
  }
  return c;
}

RegionCounts region_counts(std::span<const double> z, std::span<const double> p,
                           const BarrierSpec& barrier, double atom_number, double horizon) {
  long t = 0, r = 0, in = 0;
  const double zt = barrier.z_T();
  const double zr = barrier.z_R();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    if (zi > zt) {
      ++t;
    } else if (zi < zr) {
      ++r;
    }
    if (horizon > 0.0 && heading_in(zi, p[i], horizon, zr, zt)) ++in;
  }
  const auto m = static_cast<long>(z.size());
  const double w = atom_number / static_cast<double>(m);
  return {static_cast<double>(t) * w, static_cast<double>(r) * w,
          static_cast<double>(m - t - r) * w, static_cast<double>(in) * w};
}

TransmissionResult make_result(const RegionCounts& c, double atom_number, double t_end,
                               Source source) {
  TransmissionResult r;
  r.n_t = c.n_t;
  r.n_r = c.n_r;
  r.n_lost = c.n_lost;
  const double denom = atom_number - c.n_lost;
  r.T = denom > 0.0 ? std::clamp(c.n_t / denom, 0.0, 1.0) : 0.0;
  r.t_end = t_end;
  r.source = source;
  return r;
}

StopMonitor::StopMonitor(double atom_number, StopOptions options)
    : atom_number_(atom_number), options_(options) {
  if (!(atom_number > 0.0)) throw ConfigError("atom number must be positive");
  if (!(options.window > 0.0) || !(options.t_cap > 0.0)) {
    throw ConfigError("stop window and cap must be positive");
  }
}

bool StopMonitor::update(double t, const RegionCounts& counts) {
  if (met_) {
    last_ = counts;
    last_t_ = t;
    return true;
  }
  constexpr double eps = 1e-9;
  history_.push_back({t, counts});
  while (history_.size() > 1 && history_[1].t <= t - options_.window + eps) history_.pop_front();
  last_ = counts;
  last_t_ = t;

  last_region_ = (counts.n_lost + counts.n_incoming) / atom_number_;
  const double floor = options_.count_floor * atom_number_;
  double change = std::numeric_limits<double>::infinity();
  if (history_.front().t <= t - options_.window + eps) {
    change = 0.0;
    for (const auto& s : history_) {
      change = std::max(change, std::abs(s.c.n_t - counts.n_t) / std::max(counts.n_t, floor));
      change = std::max(change, std::abs(s.c.n_r - counts.n_r) / std::max(counts.n_r, floor));
    }
  }
  last_change_ = change;

  if (last_region_ < options_.region_tolerance && change < options_.relative_change) {
    met_ = true;
    t_end_ = t;
    history_.clear();
    return true;
  }
  if (t >= options_.t_cap - eps) {
    capped_ = true;
    t_end_ = t;
  }
  return false;
}

std::string StopMonitor::diagnostics() const {
  std::ostringstream os;
  os << (met_ ? "stop criterion met" : capped_ ? "cap reached" : "running") << " at t = " << last_t_
     << "; barrier-region and incoming fraction " << last_region_ << " (limit " << options_.region_tolerance
     << "), window relative change " << last_change_ << " (limit " << options_.relative_change
     << ")";
  return os.str();
}

TransmissionResult measure(const StopMonitor& monitor, Source source) {
  if (!monitor.done()) {
    throw PrematureMeasurementError("transmission requested before the stop criterion: " +
                                    monitor.diagnostics());
  }
  const RegionCounts& c = monitor.last();
  const double n = c.n_t + c.n_r + c.n_lost;
  TransmissionResult r = make_result(c, n, monitor.t_end(), source);
  r.converged = monitor.met();
  return r;
}

double default_stop_cap(double trap_center, double sigma_c, double k, const BarrierSpec& barrier) {
  if (!(std::abs(k) > 0.0)) return 2.0;
  const double tail = trap_center - 3.0 * sigma_c;
  const double travel = 2.0 * (barrier.z_T() - tail) / std::abs(k);
  const double energy = std::max(barrier.V0, 0.5 * k * k);
  return travel + 12.0 * barrier.sigma_b / std::sqrt(2.0 * energy);
}

EnsembleStatistics aggregate(std::span<const TransmissionResult> results) {
  if (results.size() < 2) throw AggregationError("need at least two realizations");
  EnsembleStatistics s;
  s.point = results.front().point;
  long double sum = 0.0L;
  for (const auto& r : results) {
    if (r.source != Source::kBve) throw AggregationError("aggregate expects BVE realizations");
    if (!(r.point == s.point)) throw AggregationError("realizations from different points");
    sum += r.T;
  }
  const auto R = static_cast<long double>(results.size());
  const long double mean = sum / R;
  long double ss = 0.0L;
  for (const auto& r : results) ss += (r.T - mean) * (r.T - mean);
  const long double sd = std::sqrt(ss / (R - 1.0L));
  s.mean = static_cast<double>(mean);
  s.stderr_ = static_cast<double>(sd / std::sqrt(R));
  s.error_bar = 3.0 * s.stderr_;
  s.count = results.size();
  return s;
}

TunnelingResult quantum_tunneling(const TransmissionResult& gpe, const EnsembleStatistics& bve) {
  if (!(gpe.point == bve.point)) throw PairingError("GPE and BVE results belong to different points");
  TunnelingResult t;
  t.point = gpe.point;
  t.t_gpe = gpe.T;
  t.t_bve_mean = bve.mean;
  t.t_bve_stderr = bve.stderr_;
  t.delta_T = gpe.T - bve.mean;
  t.error_bar = bve.error_bar;
  return t;
}

}  // namespace tunnelsim
