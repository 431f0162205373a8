// Command-line front end: ground-state, run, sweep, analyze, plot, breathing.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tunnelsim/analysis.hpp"
#include "tunnelsim/breathing.hpp"
#include "tunnelsim/config.hpp"
#include "tunnelsim/error.hpp"
#include "tunnelsim/plot.hpp"
#include "tunnelsim/results_io.hpp"
#include "tunnelsim/simulation.hpp"
#include "tunnelsim/sweep.hpp"
#include "tunnelsim/version.hpp"

namespace fs = std::filesystem;
using namespace tunnelsim;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
};

RunConfig load(const Common& c) {
  return c.config.empty() ? parse_run_config("", "<defaults>") : load_run_config(c.config);
}

fs::path output_dir(const Common& c, const RunConfig& cfg) {
  const std::optional<fs::path> flag = c.out.empty() ? std::nullopt : std::optional<fs::path>(c.out);
  fs::path dir = resolve_output_dir(flag, cfg.output);
  fs::create_directories(dir);
  return dir;
}

// Streams records to a temporary file and renames it on commit.
class AtomicStream {
 public:
  explicit AtomicStream(fs::path path) : path_(std::move(path)), tmp_(path_) {
    tmp_ += ".partial";
    out_.open(tmp_, std::ios::trunc);
    if (!out_) throw ConfigError("cannot write " + tmp_.string());
  }
  ~AtomicStream() {
    if (out_.is_open()) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.close();
    fs::rename(tmp_, path_);
  }

 private:
  fs::path path_, tmp_;
  std::ofstream out_;
};

int cmd_ground_state(const Common& c) {
  const RunConfig cfg = load(c);
  const InitialState init = prepare_initial_state(cfg.physics, cfg.grid);
  const fs::path dir = output_dir(c, cfg);
  const Wavefunction& psi = init.ground.psi;
  const double N = cfg.physics.atom_number;
  const std::vector<double> trap = harmonic_potential(psi.grid, cfg.physics.trap_center);
  const EnergyParts e = energy_functional(psi, trap, init.scales.g1d_initial);

  std::string table = "z,psi_re,psi_im,rho\n";
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    const double rho = std::norm(psi.values[j]);
    if (rho < 1e-30 * N) continue;
    table += format_double(psi.grid.z(j)) + ',' + format_double(psi.values[j].real()) + ',' +
             format_double(psi.values[j].imag()) + ',' + format_double(rho) + '\n';
  }
  write_atomic(dir / "ground_state.csv", table);

  json report = {{"sigma_c_lz", init.sigma_c()},
                 {"mu_numeric_hbar_wz", init.ground.mu},
                 {"mu1d_thomas_fermi_hbar_wz", init.scales.mu1d},
                 {"mu3d_hbar_wz", init.scales.mu3d},
                 {"g1d_initial", init.scales.g1d_initial},
                 {"g1d_quench", init.scales.g1d_quench},
                 {"l_z_m", init.scales.l_z},
                 {"iterations", init.ground.iterations},
                 {"energy_per_particle_hbar_wz",
                  {{"kinetic", e.kinetic / N}, {"potential", e.potential / N},
                   {"interaction", e.interaction / N}, {"total", e.total() / N}}},
                 {"mean_field_per_particle_hbar_wz", 2.0 * e.interaction / N},
                 {"kinetic_E_hbar_wz", init.scales.kinetic_E}};
  write_atomic(dir / "ground_state.json", report.dump(2) + "\n");
  std::printf("sigma_c = %.6f l_z\nmu1D (Thomas-Fermi) = %.6f hbar w_z\nmu (numerical) = %.6f hbar w_z\n"
              "energy per particle = %.6f hbar w_z\nwrote %s\n",
              init.sigma_c(), init.scales.mu1d, init.ground.mu, e.total() / N,
              (dir / "ground_state.csv").string().c_str());
  return 0;
}

int cmd_run(const Common& c, const std::string& solver, std::optional<long> seed_flag) {
  RunConfig cfg = load(c);
  if (solver != "gpe" && solver != "bve") throw ConfigError("--solver must be gpe or bve");
  const std::uint64_t seed = seed_flag ? static_cast<std::uint64_t>(*seed_flag) : cfg.seed;
  const fs::path dir = output_dir(c, cfg);
  const InitialState init = prepare_initial_state(cfg.physics, cfg.grid);
  const BarrierSpec barrier = cfg.barrier.resolve(cfg.physics);
  const double g = init.scales.g1d_quench;
  const double E = init.scales.kinetic_E;
  const PointKey point{cfg.physics.a_s_quench, barrier.V0 / E, barrier.sigma_b};

  std::optional<AtomicStream> dump;
  long samples_seen = 0;
  RunOutcome outcome;
  const std::string stem = solver == "gpe" ? "run_gpe" : "run_bve_seed" + std::to_string(seed);
  if (solver == "gpe") {
    if (cfg.output.trajectory) {
      dump.emplace(dir / (stem + "_trajectory.csv"));
      dump->stream() << "t,z,rho\n";
    }
    Observer hook;
    if (dump) {
      hook = [&](const Snapshot& s) {
        if (samples_seen++ % cfg.output.trajectory_every != 0) return true;
        auto& os = dump->stream();
        for (std::size_t j = 0; j < s.psi.size(); ++j) {
          os << format_double(s.t) << ',' << format_double(s.grid->z(j)) << ','
             << format_double(std::norm(s.psi[j])) << '\n';
        }
        return true;
      };
    }
    outcome = run_gpe(init, barrier, g, cfg.grid, {}, hook);
  } else {
    if (cfg.output.phase_space) {
      dump.emplace(dir / (stem + "_phase_space.csv"));
      dump->stream() << "t,i,z,p\n";
    }
    EnsembleObserver hook;
    if (dump) {
      hook = [&](const EnsembleSnapshot& s) {
        if (samples_seen++ % cfg.output.phase_space_every != 0) return true;
        auto& os = dump->stream();
        const auto& e = *s.ensemble;
        for (std::size_t i = 0; i < e.size(); ++i) {
          os << format_double(s.t) << ',' << i << ',' << format_double(e.z[i]) << ','
             << format_double(e.p[i]) << '\n';
        }
        return true;
      };
    }
    outcome = run_bve(init, barrier, g, cfg.physics.samples, seed, cfg.grid, {}, hook);
    outcome.result.realization = 0;
  }
  if (dump) dump->commit();
  outcome.result.point = point;

  write_results_csv(dir / (stem + ".csv"), {outcome.result});
  std::vector<TransmissionResult> all;
  const fs::path results = dir / "results.csv";
  if (fs::exists(results)) all = read_results_csv(results);
  all.push_back(outcome.result);
  write_atomic(results, format_results_csv(all));

  std::cout << kResultHeader << '\n' << format_results_csv({outcome.result}).substr(kResultHeader.size() + 1);
  std::cerr << outcome.diagnostics << '\n';
  if (!outcome.result.converged) {
    std::cerr << "stop criterion not met before the cap\n";
    return static_cast<int>(ExitCode::kUnconverged);
  }
  return 0;
}

int cmd_sweep(const Common& c, int jobs, bool fresh) {
  const RunConfig cfg = load(c);
  const SweepSpec spec = cfg.sweep.build(cfg.physics, cfg.seed);
  const fs::path dir = output_dir(c, cfg);
  SweepOptions opts;
  opts.csv = dir / (spec.name + ".csv");
  opts.manifest = dir / (spec.name + ".manifest.json");
  opts.jobs = jobs;
  opts.resume = !fresh;
  opts.config_echo = cfg.text;
  opts.progress = [](const PointKey& p, std::size_t done, std::size_t total) {
    std::fprintf(stderr, "[%zu/%zu] a_s=%g V0/E=%g sigma_b=%g\n", done, total, p.a_s_a0, p.V0_over_E,
                 p.sigma_b_lz);
  };
  const SweepOutcome out = run_sweep(cfg.physics, cfg.grid, spec, opts);
  std::printf("%zu points computed, %zu reused, %.1f s; wrote %s\n", out.computed_points,
              out.reused_points, out.wall_seconds, opts.csv.string().c_str());
  for (const auto& r : out.rows) {
    if (!r.converged) {
      std::fprintf(stderr, "warning: unconverged stop criterion at a_s=%g V0/E=%g sigma_b=%g\n",
                   r.point.a_s_a0, r.point.V0_over_E, r.point.sigma_b_lz);
    }
  }
  return 0;
}

int cmd_analyze(const Common& c, const std::string& input) {
  const RunConfig cfg = load(c);
  const auto rows = read_results_csv(input);
  const AnalysisReport report = analyze(rows, cfg.physics.sigma_c_ref);
  const fs::path dir = output_dir(c, cfg);
  const fs::path out = dir / (fs::path(input).stem().string() + ".analysis.json");
  write_atomic(out, report_json(report));

  std::printf("%10s %10s %10s %12s %12s %12s %12s\n", "a_s_a0", "V0_over_E", "sigma_b_lz", "T_GPE",
              "T_BVE", "delta_T", "3stderr");
  for (const auto& t : report.tunneling) {
    std::printf("%10g %10g %10g %12.6f %12.6f %12.6f %12.6f\n", t.point.a_s_a0, t.point.V0_over_E,
                t.point.sigma_b_lz, t.t_gpe, t.t_bve_mean, t.delta_T, t.error_bar);
  }
  for (const auto& f : report.fits) {
    if (!f.error.empty()) {
      std::printf("fit %s (%s, a_s=%g): %s\n", f.quantity.c_str(), f.axis.c_str(), f.a_s_a0, f.error.c_str());
      continue;
    }
    std::printf("fit %s %s a_s=%g:", f.quantity.c_str(), std::string(to_string(f.fit.model)).c_str(), f.a_s_a0);
    for (double p : f.fit.params) std::printf(" %.6g", p);
    std::printf("  r2=%.6f\n", f.fit.r_squared);
  }
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_plot(const Common& c, const std::string& input, int figure) {
  const RunConfig cfg = load(c);
  const auto rows = read_results_csv(input);
  PlotProvenance prov{input, ""};
  const fs::path manifest = fs::path(input).replace_extension(".manifest.json");
  if (fs::exists(manifest)) {
    try {
      prov.spec_hash = json::parse(read_file(manifest)).value("spec_hash", "");
    } catch (const std::exception&) {
    }
  }
  const std::string svg = render_figure(figure, rows, cfg.physics.sigma_c_ref, prov);
  const fs::path dir = output_dir(c, cfg);
  const fs::path out = dir / ("figure" + std::to_string(figure) + ".svg");
  write_atomic(out, svg);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_breathing(const Common& c, double quench, std::optional<double> a_s) {
  const RunConfig cfg = load(c);
  BreathingOptions opts;
  opts.quench = quench;
  opts.a_s = a_s;
  opts.samples = cfg.physics.samples;
  opts.seed = cfg.seed;
  const BreathingResult r = breathing_mode_test(cfg.physics, cfg.grid, opts);
  json j;
  j["g1d"] = r.g1d;
  j["mu"] = r.mu;
  j["omega_after"] = r.omega_after;
  j["quench"] = quench;
  j["a_s_a0"] = a_s.value_or(cfg.physics.a_s_initial);
  for (const auto& [name, mode] : {std::pair{"gpe", &r.gpe}, std::pair{"bve", &r.bve}}) {
    if (!*mode) continue;
    const BreathingMode& m = **mode;
    j[name] = {{"frequency", m.frequency}, {"ratio", m.ratio}, {"r_squared", m.fit.r_squared}};
    std::printf("%s breathing frequency %.6f w_z (%.6f x omega_after, r^2 %.6f)\n", name, m.frequency,
                m.ratio, m.fit.r_squared);
  }
  const fs::path out = output_dir(c, cfg) / "breathing.json";
  write_atomic(out, j.dump(2) + "\n");
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission and tunneling of a 1D condensate through a Gaussian barrier"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common common;
  int jobs = 1;
  app.add_option("--config", common.config, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", common.out, "Output directory (overrides TUNNELSIM_OUT)");

  auto* gs = app.add_subcommand("ground-state", "Compute the trapped ground state and report sigma_c");
  auto* run = app.add_subcommand("run", "Single collision with one solver");
  std::string solver = "gpe";
  std::optional<long> seed;
  run->add_option("--solver", solver, "gpe or bve")->check(CLI::IsMember({"gpe", "bve"}));
  run->add_option("--seed", seed, "BVE seed (defaults to bve.seed)");
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep with paired GPE/BVE runs");
  bool fresh = false;
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--fresh", fresh, "Ignore completed points from an earlier run");
  auto* analyze_cmd = app.add_subcommand("analyze", "Tunneling table and fits from a result table");
  std::string input;
  analyze_cmd->add_option("results", input, "Result CSV")->required();
  auto* plot = app.add_subcommand("plot", "Render a figure as SVG");
  int figure = 3;
  plot->add_option("results", input, "Result CSV")->required();
  plot->add_option("--figure", figure, "3, 4, 5 or 6")->required()->check(CLI::IsMember({3, 4, 5, 6}));
  auto* breathing = app.add_subcommand("breathing", "Monopole frequency after a small trap quench");
  double quench = 1.02;
  std::optional<double> breathing_a_s;
  breathing->add_option("--quench", quench, "omega after / omega_z")->check(CLI::PositiveNumber);
  breathing->add_option("--a-s", breathing_a_s, "Scattering length in a0 (default physics.a_s_initial)");
  for (auto* sub : {gs, run, sweep, analyze_cmd, plot, breathing}) {
    sub->add_option("--config", common.config, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output directory (overrides TUNNELSIM_OUT)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfiguration);
  }

  try {
    if (*gs) return cmd_ground_state(common);
    if (*run) return cmd_run(common, solver, seed);
    if (*sweep) return cmd_sweep(common, jobs, fresh);
    if (*analyze_cmd) return cmd_analyze(common, input);
    if (*plot) return cmd_plot(common, input, figure);
    if (*breathing) return cmd_breathing(common, quench, breathing_a_s);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kInternal);
  }
  return 0;
}
