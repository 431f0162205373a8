#pragma once

// Reduced resolution shared by the end-to-end tests.

#include "tunnelsim/simulation.hpp"

namespace tunnelsim::test {

inline GridSettings coarse_grid() {
  GridSettings s;
  s.n_points = 4096;
  s.dt = 5e-4;
  s.observer_every = 20;
  s.ground_state_points = 1024;
  s.ground_state_tolerance = 1e-10;
  return s;
}

inline const InitialState& coarse_initial_state() {
  static const InitialState init = prepare_initial_state(PhysicsConfig{}, coarse_grid());
  return init;
}

}  // namespace tunnelsim::test
