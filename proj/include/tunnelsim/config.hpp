#pragma once

// Line-oriented run configuration:
//
//   [physics]
//   omega_z = 10 Hz
//   a_s_quench = 0.5 a0
//   barrier.sigma_b = 1 lz
//
// Keys are either written under a [section] header or fully qualified as
// section.key. Values may carry a unit suffix; '#' starts a comment.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelsim/potentials.hpp"
#include "tunnelsim/simulation.hpp"
#include "tunnelsim/sweep.hpp"
#include "tunnelsim/units.hpp"

namespace tunnelsim {

struct BarrierInput {
  std::optional<double> V0;    // hbar w_z
  double V0_over_E = 1.0;      // used when V0 is unset
  double sigma_b = 1.0;        // l_z
  std::optional<double> z0_prime;  // l_z; placement rule when unset

  BarrierSpec resolve(const PhysicsConfig& physics) const;
};

struct SweepSettings {
  std::string kind = "width";  // width | height_scatter | custom
  std::optional<std::vector<double>> a_s;
  std::optional<std::vector<double>> V0_over_E;
  std::optional<std::vector<double>> sigma_b;  // l_z
  int width_points = 17;
  int height_points = 21;
  int scattering_points = 13;

  SweepSpec build(const PhysicsConfig& physics, std::uint64_t master_seed) const;
};

struct OutputSettings {
  std::filesystem::path dir;  // empty: TUNNELSIM_OUT or ./tunnelsim_out
  bool trajectory = false;
  long trajectory_every = 100;  // observer samples between dumped records
  bool phase_space = false;
  long phase_space_every = 100;
};

struct RunConfig {
  PhysicsConfig physics;
  BarrierInput barrier;
  GridSettings grid;
  std::uint64_t seed = 1;  // master seed
  SweepSettings sweep;
  OutputSettings output;
  std::string text;  // verbatim source

  void validate() const;
};

/// Throws ConfigError with "origin:line: message" diagnostics.
RunConfig parse_run_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Output directory: explicit flag, then TUNNELSIM_OUT, then the config, then ./tunnelsim_out.
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag,
                                         const OutputSettings& output);

}  // namespace tunnelsim
