#pragma once

namespace tunnelsim {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kGpeSolverVersion = "strang-split-step/1";
inline constexpr const char* kBveSolverVersion = "velocity-verlet-cic-kde/1";

}  // namespace tunnelsim
