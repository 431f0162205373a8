#pragma once

// Parameter scans over scattering length, barrier height and barrier width,
// pairing one GPE run with R seeded BVE realizations per point.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tunnelsim/analysis.hpp"
#include "tunnelsim/error.hpp"
#include "tunnelsim/fit.hpp"
#include "tunnelsim/simulation.hpp"
#include "tunnelsim/units.hpp"

namespace tunnelsim {

struct SweepSpec {
  std::string name = "sweep";
  std::vector<double> a_s;        // a0
  std::vector<double> V0_over_E;  // dimensionless
  std::vector<double> sigma_b;    // l_z
  long realizations = 20;
  long samples = 10000;
  std::uint64_t master_seed = 1;

  /// Cartesian product in canonical order.
  std::vector<PointKey> points() const;
  /// Throws ConfigError on empty axes, sigma_b <= 0, V0/E < 0 or realizations < 1.
  void validate() const;
};

/// `count` log-spaced values lo * (hi/lo)^(i/(count-1)).
std::vector<double> log_space(double lo, double hi, int count);
std::vector<double> lin_space(double lo, double hi, int count);

/// sigma_b in [0.1, 10] sigma_c (17 log points) at V0/E = 1.1.
SweepSpec width_sweep(const PhysicsConfig& cfg, std::vector<double> a_s = {-0.5, 0.0, 0.5},
                      int count = 17);
/// V0/E in [0.9, 1.1] (21 points) x a_s in [-0.5, 1] a0 (13 points) at sigma_b = l_z.
SweepSpec height_scatter_sweep(const PhysicsConfig& cfg, int heights = 21, int scattering = 13);

/// Seed of BVE realization r.
inline std::uint64_t realization_seed(std::uint64_t master_seed, long r) {
  return master_seed + static_cast<std::uint64_t>(r);
}

struct PointResult {
  PointKey point;
  TransmissionResult gpe;
  std::vector<TransmissionResult> bve;
  TunnelingResult tunneling;
};

/// Solver failure at a sweep point; keeps the exit code of the original error.
class PointError : public Error {
 public:
  PointError(const PointKey& p, const Error& cause);
  const PointKey& point() const noexcept { return point_; }

 private:
  PointKey point_;
};

TransmissionResult run_point_gpe(const InitialState& init, const PointKey& point,
                                 const GridSettings& settings);
TransmissionResult run_point_bve(const InitialState& init, const PointKey& point,
                                 const GridSettings& settings, long samples,
                                 std::uint64_t master_seed, long realization);

/// One GPE run plus R BVE realizations from the shared ground state and kick.
PointResult run_point(const InitialState& init, const PointKey& point, const GridSettings& settings,
                      long samples, long realizations, std::uint64_t master_seed);

/// Pairs the rows of each point into tunneling results (points without two BVE rows are skipped).
std::vector<TunnelingResult> tunneling_table(const std::vector<TransmissionResult>& rows);

struct SweepOptions {
  std::filesystem::path csv;       // result table
  std::filesystem::path manifest;  // JSON manifest next to it
  int jobs = 1;
  bool resume = true;
  std::string config_echo;         // verbatim configuration text
  std::function<void(const PointKey&, std::size_t done, std::size_t total)> progress;
};

struct SweepOutcome {
  std::vector<TransmissionResult> rows;
  std::size_t computed_points = 0;
  std::size_t reused_points = 0;
  double wall_seconds = 0.0;
  std::string spec_hash;
};

/// Canonical description of everything that determines the result table.
std::string sweep_fingerprint(const PhysicsConfig& cfg, const GridSettings& grid,
                              const SweepSpec& spec);

/// Runs every missing point on a bounded worker pool. Completed points are
/// persisted after each finishes; a rerun with the same fingerprint reuses them.
SweepOutcome run_sweep(const PhysicsConfig& cfg, const GridSettings& grid, const SweepSpec& spec,
                       const SweepOptions& options);

struct NamedFit {
  std::string quantity;  // T_GPE, T_BVE or delta_T
  std::string axis;      // width or height
  double a_s_a0 = 0.0;
  double fixed = 0.0;    // V0/E of a width series, sigma_b of a height series
  std::vector<double> x, y;
  FitResult fit;
  std::string error;     // non-empty when the fit failed
};

struct AnalysisReport {
  std::vector<TunnelingResult> tunneling;
  std::vector<NamedFit> fits;
};

/// Exponential fits of T_GPE, T_BVE and Delta T against sigma_b / sigma_c_ref for
/// series varying in width, tanh fits against V0/E for series varying in height.
AnalysisReport analyze(const std::vector<TransmissionResult>& rows, double sigma_c_ref);

std::string report_json(const AnalysisReport& report);

}  // namespace tunnelsim
