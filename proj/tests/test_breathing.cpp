#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles/statistics.hpp"
#include "tunnelsim/breathing.hpp"
#include "tunnelsim/error.hpp"
#include "tunnelsim/gpe.hpp"
#include "tunnelsim/potentials.hpp"

using namespace tunnelsim;

TEST_CASE("non-interacting cloud breathes at twice the trap frequency") {
  BreathingOptions o;
  o.a_s = 0.0;
  o.duration = 12.0;
  o.samples = 4000;
  const BreathingResult r = breathing_mode_test(PhysicsConfig{}, GridSettings{}, o);
  REQUIRE(r.gpe);
  REQUIRE(r.bve);
  CHECK(r.g1d == 0.0);
  CHECK(r.gpe->ratio == doctest::Approx(2.0).epsilon(5e-3));
  CHECK(r.bve->ratio == doctest::Approx(2.0).epsilon(5e-3));
  CHECK(r.gpe->fit.r_squared > 0.99);
}

TEST_CASE("interacting cloud matches the scaling ansatz") {
  const PhysicsConfig cfg;
  BreathingOptions o;
  o.bve = false;
  const BreathingResult r = breathing_mode_test(cfg, GridSettings{}, o);
  REQUIRE(r.gpe);
  CHECK_FALSE(r.bve);

  // Energy parts of the post-quench ground state by finite differences.
  const Grid grid(cfg.trap_center - 32.0, cfg.trap_center + 32.0, 2048);
  const std::vector<double> trap = harmonic_potential(grid, cfg.trap_center, o.quench);
  const GroundState gs = ground_state(grid, trap, r.g1d, cfg.atom_number);
  const double dz = grid.dz();
  double K = 0.0, P = 0.0, I = 0.0;
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    const std::complex<double> d = (gs.psi.values[j + 1] - gs.psi.values[j - 1]) / (2.0 * dz);
    const double rho = std::norm(gs.psi.values[j]);
    K += 0.5 * std::norm(d) * dz;
    P += trap[j] * rho * dz;
    I += 0.5 * r.g1d * rho * rho * dz;
  }
  CHECK(r.gpe->ratio == doctest::Approx(oracle::breathing_ratio(K, P, I)).epsilon(3e-3));
  CHECK(r.gpe->ratio == doctest::Approx(std::sqrt(3.0)).epsilon(5e-3));
}

TEST_CASE("breathing option errors") {
  BreathingOptions o;
  o.grid_points = 1000;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.a_s = -1.0;
  CHECK_THROWS_AS(breathing_mode_test(PhysicsConfig{}, GridSettings{}, o), ConfigError);
}
