#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oracles/thomas_fermi.hpp"
#include "tunnelsim/config.hpp"
#include "tunnelsim/error.hpp"
#include "tunnelsim/units.hpp"

using namespace tunnelsim;

TEST_CASE("oscillator length and kick energy") {
  PhysicsConfig cfg;
  const DerivedScales s = nondimensionalize(cfg);
  const double m = 84.911789738 * oracle::codata::amu;
  const double w = 2.0 * std::numbers::pi * 10.0;
  CHECK(s.l_z == doctest::Approx(std::sqrt(oracle::codata::hbar / (m * w))).epsilon(1e-12));
  CHECK(s.l_z == doctest::Approx(3.45e-6).epsilon(0.01));
  CHECK(s.kinetic_E == 200.0);
  CHECK(s.time_unit == doctest::Approx(1.0 / w));
  cfg.kick_k = 0.0;
  CHECK(nondimensionalize(cfg).kinetic_E == 0.0);
}

TEST_CASE("g3d is linear and odd in the scattering length") {
  const double m = constants::kRb85Mass;
  CHECK(derive_g3d(0.0, m) == 0.0);
  const double g5 = derive_g3d(5.0, m);
  CHECK(g5 == doctest::Approx(4.0 * std::numbers::pi * oracle::codata::hbar * oracle::codata::hbar * 5.0 *
                              oracle::codata::bohr / m));
  CHECK(derive_g3d(-0.5, m) < 0.0);
  CHECK(derive_g3d(-0.5, m) == doctest::Approx(-0.1 * g5));
}

TEST_CASE("mu3d matches the Thomas-Fermi normalization integral") {
  PhysicsConfig cfg;
  const double g3d = derive_g3d(cfg.a_s_initial, cfg.mass);
  const double mu = derive_mu3d(cfg, g3d);
  const double quad = oracle::mu3d(cfg.atom_number, cfg.a_s_initial, cfg.mass, cfg.omega_perp, cfg.omega_z);
  CHECK(mu == doctest::Approx(quad).epsilon(1e-6));
  CHECK(mu == doctest::Approx(15.826).epsilon(1e-4));
  // Recovers N when put back into the ellipsoid integral.
  const double e = constants::kHbar * cfg.omega_z;
  CHECK(oracle::tf_atoms_3d(mu * e, g3d, cfg.mass, cfg.omega_perp, cfg.omega_z) ==
        doctest::Approx(cfg.atom_number).epsilon(1e-6));

  PhysicsConfig twice = cfg;
  twice.atom_number *= 2.0;
  CHECK(derive_mu3d(twice, g3d) / mu == doctest::Approx(std::pow(2.0, 0.4)).epsilon(1e-12));
  CHECK_THROWS_AS(derive_mu3d(cfg, 0.0), DerivationDomainError);
  CHECK_THROWS_AS(derive_mu3d(cfg, -g3d), DerivationDomainError);
}

TEST_CASE("g1d equates the 1D and 3D chemical potentials") {
  PhysicsConfig cfg;
  const double g3d = derive_g3d(5.0, cfg.mass);
  const double g = derive_g1d(cfg, g3d);
  const double mu = derive_mu3d(cfg, g3d);
  CHECK(g == doctest::Approx(oracle::g1d_matching(mu, cfg.atom_number)).epsilon(1e-10));
  CHECK(g == doctest::Approx(0.00118719).epsilon(1e-5));
  CHECK(oracle::mu1d(g, cfg.atom_number) == doctest::Approx(mu).epsilon(1e-6));
  CHECK(derive_g1d(cfg, 0.0) == 0.0);
  CHECK(derive_g1d(cfg, derive_g3d(10.0, cfg.mass)) / g == doctest::Approx(std::pow(2.0, 0.6)).epsilon(1e-12));
}

TEST_CASE("round trip mu1d(g1d) = mu3d over a log grid of a_s") {
  PhysicsConfig cfg;
  double previous = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double a = 0.1 * std::pow(100.0, i / 20.0);
    const double g3d = derive_g3d(a, cfg.mass);
    const double g = derive_g1d(cfg, g3d);
    CHECK(std::abs(mu1d_thomas_fermi(g, cfg.atom_number) / derive_mu3d(cfg, g3d) - 1.0) < 1e-10);
    CHECK(g > previous);
    CHECK(derive_g1d(cfg, derive_g3d(-a, cfg.mass)) == -g);
    previous = g;
  }
}

TEST_CASE("derived scales are pure functions of the config") {
  PhysicsConfig cfg;
  const DerivedScales a = nondimensionalize(cfg);
  const DerivedScales b = nondimensionalize(cfg);
  CHECK(a.g1d_initial == b.g1d_initial);
  CHECK(a.mu1d == b.mu1d);
  CHECK(std::abs(a.mu1d / a.mu3d - 1.0) < 1e-12);
  CHECK(a.g1d_quench == 0.0);
}

TEST_CASE("physics invariants are enforced") {
  auto bad = [](auto mutate) {
    PhysicsConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  bad([](PhysicsConfig& c) { c.atom_number = 0.0; });
  bad([](PhysicsConfig& c) { c.mass = -1.0; });
  bad([](PhysicsConfig& c) { c.omega_z = 0.0; });
  bad([](PhysicsConfig& c) { c.omega_perp = -3.0; });
  bad([](PhysicsConfig& c) { c.a_s_initial = -1.0; });
  bad([](PhysicsConfig& c) { c.samples = 0; });
  bad([](PhysicsConfig& c) { c.realizations = 0; });
  PhysicsConfig ok;
  CHECK_NOTHROW(ok.validate());
  PhysicsConfig zero_freq;
  zero_freq.omega_z = 0.0;
  CHECK_THROWS_AS(nondimensionalize(zero_freq), ConfigError);
}

TEST_CASE("config defaults") {
  const RunConfig cfg = parse_run_config("", "<empty>");
  CHECK(cfg.physics.atom_number == 1e5);
  CHECK(cfg.physics.omega_perp == doctest::Approx(2.0 * std::numbers::pi * 70.0));
  CHECK(cfg.physics.omega_z == doctest::Approx(2.0 * std::numbers::pi * 10.0));
  CHECK(cfg.physics.a_s_initial == 5.0);
  CHECK(cfg.physics.kick_k == 20.0);
  CHECK(cfg.physics.trap_center == -50.0);
  CHECK(cfg.physics.samples == 10000);
  CHECK(cfg.physics.realizations == 20);
  CHECK(cfg.grid.n_points == 16384);
  CHECK(cfg.grid.dt == 1e-4);
}

TEST_CASE("config parses sections, qualified keys and units") {
  const RunConfig cfg = parse_run_config(R"(# comment
[physics]
omega_z = 62.83185307179586 rad/s
omega_perp = 70 Hz   # trailing comment
mass = 86.909180527 u
a_s_quench = -0.5 a0
[barrier]
sigma_b = 2 sigma_c
V0_over_E = 1.1
grid.dt = 5e-5 1/wz
[bve]
samples = 2000
seed = 7
[sweep]
kind = custom
a_s = 0, 0.5
V0_over_E = 0.9, 1.1
sigma_b = 1 lz
)",
                                         "test.cfg");
  CHECK(cfg.physics.omega_z == doctest::Approx(62.83185307179586));
  CHECK(cfg.physics.omega_perp == doctest::Approx(2.0 * std::numbers::pi * 70.0));
  CHECK(cfg.physics.mass == doctest::Approx(86.909180527 * constants::kAtomicMassUnit));
  CHECK(cfg.physics.a_s_quench == -0.5);
  CHECK(cfg.barrier.sigma_b == doctest::Approx(2.0 * 4.7));
  CHECK(cfg.barrier.V0_over_E == 1.1);
  CHECK(cfg.grid.dt == 5e-5);
  CHECK(cfg.physics.samples == 2000);
  CHECK(cfg.seed == 7);
  const SweepSpec spec = cfg.sweep.build(cfg.physics, cfg.seed);
  CHECK(spec.points().size() == 4);
  CHECK(cfg.text.find("kind = custom") != std::string::npos);
}

TEST_CASE("config diagnostics carry origin and line") {
  auto message = [](const char* text) {
    try {
      parse_run_config(text, "bad.cfg");
    } catch (const ConfigError& e) {
      CHECK(e.code() == ExitCode::kConfiguration);
      return std::string(e.what());
    }
    FAIL("expected a configuration error");
    return std::string();
  };
  CHECK(message("[physics]\nbogus = 1\n") == "bad.cfg:2: unknown key 'physics.bogus'");
  CHECK(message("[nonsense]\n").find("bad.cfg:1: unknown section") == 0);
  CHECK(message("[physics]\nomega_z = 10 furlongs\n").find("bad.cfg:2: unit 'furlongs'") == 0);
  CHECK(message("physics.kick_k = 20\nphysics.kick_k = 21\n").find("bad.cfg:2: duplicate key") == 0);
  CHECK(message("kick_k = 20\n").find("bad.cfg:1:") == 0);
  CHECK(message("[physics]\nkick_k\n").find("bad.cfg:2: expected 'key = value'") == 0);
  CHECK(message("[physics]\nkick_k = abc\n").find("bad.cfg:2:") == 0);
  CHECK(message("[physics]\natom_number = -5\n").find("bad.cfg") == 0);
  CHECK(message("[grid]\nn_points = 1000\n").find("bad.cfg") == 0);
}

TEST_CASE("output directory precedence") {
  OutputSettings out;
  out.dir = "from_config";
  ::unsetenv("TUNNELSIM_OUT");
  CHECK(resolve_output_dir(std::nullopt, out) == "from_config");
  CHECK(resolve_output_dir(std::nullopt, OutputSettings{}) == "tunnelsim_out");
  ::setenv("TUNNELSIM_OUT", "from_env", 1);
  CHECK(resolve_output_dir(std::nullopt, out) == "from_env");
  CHECK(resolve_output_dir(std::filesystem::path("from_flag"), out) == "from_flag");
  ::unsetenv("TUNNELSIM_OUT");
}
