#pragma once

// Observables of a barrier collision: atom counts in the transmitted,
// reflected and barrier regions, the stop-time monitor, multi-realization
// statistics and the quantum-tunneling difference.

#include <complex>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelsim/bve.hpp"
#include "tunnelsim/gpe.hpp"
#include "tunnelsim/grid.hpp"
#include "tunnelsim/potentials.hpp"

namespace tunnelsim {

enum class Source { kGpe, kBve };

std::string_view to_string(Source s) noexcept;
/// Parses "GPE" or "BVE"; throws SchemaError otherwise.
Source parse_source(std::string_view s);

/// Coordinates of a sweep point.
struct PointKey {
  double a_s_a0 = 0.0;
  double V0_over_E = 0.0;
  double sigma_b_lz = 0.0;

  bool operator==(const PointKey&) const = default;
  auto operator<=>(const PointKey&) const = default;
};

/// Atoms on each side of the barrier. Counts are atom numbers.
struct RegionCounts {
  double n_t = 0.0;
  double n_r = 0.0;
  double n_lost = 0.0;
  // Atoms outside [z_R, z_T] whose free-streaming path enters it within the horizon.
  double n_incoming = 0.0;
};

struct TransmissionResult {
  double n_t = 0.0;
  double n_r = 0.0;
  double n_lost = 0.0;
  double T = 0.0;
  double t_end = 0.0;
  Source source = Source::kGpe;
  int realization = -1;       // -1 for the GPE row
  std::int64_t seed = -1;     // -1 for the GPE row
  PointKey point;
  bool converged = true;
};

/// Integral of the piecewise-linear interpolant of `density` over [a, b]
/// intersected with [z_0, z_{n-1}].
double integrate_linear(const Grid& grid, std::span<const double> density, double a, double b);

/// GPE: N_T over [z_T, inf), N_R over (-inf, z_R], N_lost over [z_R, z_T].
/// Incoming atoms use the local velocity Im(psi* psi') / |psi|^2.
RegionCounts region_counts(const Grid& grid, std::span<const std::complex<double>> psi,
                           const BarrierSpec& barrier, double horizon = 0.0);
/// BVE: sample counts with z > z_T, z < z_R, and the rest, scaled by N / M.
RegionCounts region_counts(std::span<const double> z, std::span<const double> p,
                           const BarrierSpec& barrier, double atom_number, double horizon = 0.0);

/// T = N_T / (N - N_lost).
TransmissionResult make_result(const RegionCounts& c, double atom_number, double t_end,
                               Source source);

struct StopOptions {
  double region_tolerance = 1e-5;   // barrier-region plus incoming content, fraction of N
  double relative_change = 1e-6;    // of N_T and N_R over the trailing window
  double window = 0.1;              // 1/w_z
  double t_cap = 2.0;               // 1/w_z
  double count_floor = 1e-6;        // denominator floor, fraction of N
};

/// Tracks N_T and N_R over observer samples and reports the first time the
/// barrier region is empty, nothing is still heading into it, and the counts
/// are stationary.
class StopMonitor {
 public:
  StopMonitor(double atom_number, StopOptions options = {});

  /// Feeds one sample; returns true once the criterion holds.
  bool update(double t, const RegionCounts& counts);

  bool met() const noexcept { return met_; }
  /// Sample time at or beyond the cap without the criterion holding.
  bool capped() const noexcept { return capped_; }
  /// Whether evolution should stop after the latest sample.
  bool done() const noexcept { return met_ || capped_; }
  double t_end() const noexcept { return t_end_; }
  const RegionCounts& last() const noexcept { return last_; }
  double last_time() const noexcept { return last_t_; }
  const StopOptions& options() const noexcept { return options_; }
  std::string diagnostics() const;

 private:
  struct Sample {
    double t;
    RegionCounts c;
  };
  double atom_number_;
  StopOptions options_;
  std::deque<Sample> history_;
  RegionCounts last_;
  double last_t_ = 0.0;
  double last_region_ = 0.0;
  double last_change_ = 0.0;
  bool met_ = false;
  bool capped_ = false;
  double t_end_ = 0.0;
};

/// Result at the monitor's stop time. Throws PrematureMeasurementError unless
/// the criterion holds or the cap was reached; capped runs are flagged unconverged.
TransmissionResult measure(const StopMonitor& monitor, Source source);

/// Default cap: time for the cloud's trailing edge to clear the barrier twice
/// over at the kick velocity, plus the slowest crossing time of the barrier.
/// Without a kick the cap is 2 / w_z.
double default_stop_cap(double trap_center, double sigma_c, double k, const BarrierSpec& barrier);

struct EnsembleStatistics {
  PointKey point;
  double mean = 0.0;
  double stderr_ = 0.0;
  double error_bar = 0.0;  // 3 stderr
  std::size_t count = 0;
};

/// Mean and standard error of T over BVE realizations of one point.
/// Throws AggregationError for fewer than two results, mixed points or GPE rows.
EnsembleStatistics aggregate(std::span<const TransmissionResult> results);

struct TunnelingResult {
  PointKey point;
  double t_gpe = 0.0;
  double t_bve_mean = 0.0;
  double t_bve_stderr = 0.0;
  double delta_T = 0.0;
  double error_bar = 0.0;
};

/// Delta T = T_GPE - T_BVE. Throws PairingError when the points differ.
TunnelingResult quantum_tunneling(const TransmissionResult& gpe, const EnsembleStatistics& bve);

}  // namespace tunnelsim
