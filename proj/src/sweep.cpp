#include "tunnelsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tunnelsim/results_io.hpp"
#include "tunnelsim/version.hpp"

namespace tunnelsim {

using nlohmann::json;

std::vector<double> log_space(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("invalid log-spaced axis");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    v[std::size_t(i)] = count == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(count - 1));
  }
  return v;
}

std::vector<double> lin_space(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo)) throw ConfigError("invalid linear axis");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    v[std::size_t(i)] = count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1);
  }
  return v;
}

std::vector<PointKey> SweepSpec::points() const {
  std::vector<PointKey> pts;
  for (double a : a_s) {
    for (double v : V0_over_E) {
      for (double s : sigma_b) pts.push_back({a, v, s});
    }
  }
  std::ranges::sort(pts);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

void SweepSpec::validate() const {
  if (a_s.empty() || V0_over_E.empty() || sigma_b.empty()) throw ConfigError("sweep axes must not be empty");
  for (double s : sigma_b) {
    if (!(s > 0.0)) throw ConfigError("sweep.sigma_b values must be positive");
  }
  for (double v : V0_over_E) {
    if (!(v >= 0.0)) throw ConfigError("sweep.V0_over_E values must be non-negative");
  }
  for (double a : a_s) {
    if (!std::isfinite(a)) throw ConfigError("sweep.a_s values must be finite");
  }
  if (realizations < 1) throw ConfigError("bve.realizations must be at least 1");
  if (samples < 1) throw ConfigError("bve.samples must be positive");
}

SweepSpec width_sweep(const PhysicsConfig& cfg, std::vector<double> a_s, int count) {
  SweepSpec s;
  s.name = "width";
  s.a_s = std::move(a_s);
  s.V0_over_E = {1.1};
  s.sigma_b = log_space(0.1 * cfg.sigma_c_ref, 10.0 * cfg.sigma_c_ref, count);
  s.realizations = cfg.realizations;
  s.samples = cfg.samples;
  return s;
}

SweepSpec height_scatter_sweep(const PhysicsConfig& cfg, int heights, int scattering) {
  SweepSpec s;
  s.name = "height_scatter";
  s.a_s = lin_space(-0.5, 1.0, scattering);
  s.V0_over_E = lin_space(0.9, 1.1, heights);
  s.sigma_b = {1.0};
  s.realizations = cfg.realizations;
  s.samples = cfg.samples;
  return s;
}

namespace {

std::string describe(const PointKey& p) {
  std::ostringstream os;
  os << "a_s = " << p.a_s_a0 << " a0, V0/E = " << p.V0_over_E << ", sigma_b = " << p.sigma_b_lz
     << " l_z";
  return os.str();
}

}  // namespace

PointError::PointError(const PointKey& p, const Error& cause)
    : Error(std::string(cause.what()) + " [at " + describe(p) + "]", cause.code()), point_(p) {}

TransmissionResult run_point_gpe(const InitialState& init, const PointKey& point,
                                 const GridSettings& settings) {
  try {
    const BarrierSpec b = barrier_for(init.physics, point.V0_over_E, point.sigma_b_lz);
    const double g = quench_coupling(init.physics, point.a_s_a0);
    TransmissionResult r = run_gpe(init, b, g, settings).result;
    r.point = point;
    return r;
  } catch (const PointError&) {
    throw;
  } catch (const Error& e) {
    throw PointError(point, e);
  }
}

TransmissionResult run_point_bve(const InitialState& init, const PointKey& point,
                                 const GridSettings& settings, long samples,
                                 std::uint64_t master_seed, long realization) {
  try {
    const BarrierSpec b = barrier_for(init.physics, point.V0_over_E, point.sigma_b_lz);
    const double g = quench_coupling(init.physics, point.a_s_a0);
    const std::uint64_t seed = realization_seed(master_seed, realization);
    TransmissionResult r = run_bve(init, b, g, samples, seed, settings).result;
    r.point = point;
    r.realization = static_cast<int>(realization);
    return r;
  } catch (const PointError&) {
    throw;
  } catch (const Error& e) {
    throw PointError(point, e);
  }
}

PointResult run_point(const InitialState& init, const PointKey& point, const GridSettings& settings,
                      long samples, long realizations, std::uint64_t master_seed) {
  PointResult pr;
  pr.point = point;
  pr.gpe = run_point_gpe(init, point, settings);
  for (long r = 0; r < realizations; ++r) {
    pr.bve.push_back(run_point_bve(init, point, settings, samples, master_seed, r));
  }
  if (realizations >= 2) {
    pr.tunneling = quantum_tunneling(pr.gpe, aggregate(pr.bve));
  } else {
    pr.tunneling.point = point;
    pr.tunneling.t_gpe = pr.gpe.T;
    pr.tunneling.t_bve_mean = realizations == 1 ? pr.bve[0].T : 0.0;
    pr.tunneling.delta_T = pr.tunneling.t_gpe - pr.tunneling.t_bve_mean;
  }
  return pr;
}

std::vector<TunnelingResult> tunneling_table(const std::vector<TransmissionResult>& rows) {
  std::map<PointKey, std::pair<const TransmissionResult*, std::vector<TransmissionResult>>> by_point;
  for (const auto& r : rows) {
    auto& slot = by_point[r.point];
    if (r.source == Source::kGpe) {
      slot.first = &r;
    } else {
      slot.second.push_back(r);
    }
  }
  std::vector<TunnelingResult> out;
  for (const auto& [p, slot] : by_point) {
    if (!slot.first || slot.second.size() < 2) continue;
    out.push_back(quantum_tunneling(*slot.first, aggregate(slot.second)));
  }
  return out;
}

std::string sweep_fingerprint(const PhysicsConfig& cfg, const GridSettings& grid,
                              const SweepSpec& spec) {
  json j;
  j["physics"] = {{"atom_number", cfg.atom_number},   {"mass", cfg.mass},
                  {"omega_perp", cfg.omega_perp},     {"omega_z", cfg.omega_z},
                  {"a_s_initial", cfg.a_s_initial},   {"kick_k", cfg.kick_k},
                  {"trap_center", cfg.trap_center},   {"sigma_c_ref", cfg.sigma_c_ref}};
  j["grid"] = {{"z_min", grid.z_min},
               {"z_max", grid.z_max},
               {"n_points", grid.n_points},
               {"dt", grid.dt},
               {"observer_every", grid.observer_every},
               {"t_cap", grid.t_cap ? json(*grid.t_cap) : json(nullptr)},
               {"edge_margin", grid.edge_margin},
               {"ground_state_points", grid.ground_state_points},
               {"ground_state_dtau", grid.ground_state_dtau},
               {"ground_state_tolerance", grid.ground_state_tolerance}};
  j["sweep"] = {{"a_s", spec.a_s},
                {"V0_over_E", spec.V0_over_E},
                {"sigma_b", spec.sigma_b},
                {"realizations", spec.realizations},
                {"samples", spec.samples},
                {"master_seed", spec.master_seed}};
  j["solvers"] = {{"gpe", kGpeSolverVersion}, {"bve", kBveSolverVersion}};
  return j.dump();
}

namespace {

json point_json(const PointKey& p) { return json::array({p.a_s_a0, p.V0_over_E, p.sigma_b_lz}); }

struct Manifest {
  std::string spec_hash;
  std::set<PointKey> completed;
  double wall_seconds = 0.0;
};

Manifest load_manifest(const std::filesystem::path& path) {
  Manifest m;
  const json j = json::parse(read_file(path));
  m.spec_hash = j.at("spec_hash").get<std::string>();
  for (const auto& p : j.at("completed_points")) {
    m.completed.insert({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  m.wall_seconds = j.value("wall_seconds", 0.0);
  return m;
}

std::string manifest_text(const PhysicsConfig& cfg, const GridSettings& grid, const SweepSpec& spec,
                          const std::string& hash, const std::set<PointKey>& completed,
                          std::size_t total, double wall_seconds, const std::string& config_echo) {
  json j;
  j["tool"] = "tunnelsim";
  j["version"] = kVersion;
  j["spec_hash"] = hash;
  j["sweep"] = spec.name;
  j["master_seed"] = spec.master_seed;
  j["seed_policy"] = "master_seed + realization_index";
  std::vector<std::uint64_t> seeds;
  for (long r = 0; r < spec.realizations; ++r) seeds.push_back(realization_seed(spec.master_seed, r));
  j["seeds"] = seeds;
  j["realizations"] = spec.realizations;
  j["samples"] = spec.samples;
  j["solvers"] = {{"gpe", kGpeSolverVersion}, {"bve", kBveSolverVersion}};
  const Grid g = grid.grid();
  j["resolution"] = {{"z_min", grid.z_min},
                     {"z_max", grid.z_max},
                     {"n_points", grid.n_points},
                     {"dz", g.dz()},
                     {"dt", grid.dt},
                     {"observer_every", grid.observer_every},
                     {"ground_state_points", grid.ground_state_points},
                     {"kde_cell", "bandwidth/8"}};
  j["axes"] = {{"a_s_a0", spec.a_s}, {"V0_over_E", spec.V0_over_E}, {"sigma_b_lz", spec.sigma_b}};
  j["physics"] = json::parse(sweep_fingerprint(cfg, grid, spec)).at("physics");
  json done = json::array();
  for (const auto& p : completed) done.push_back(point_json(p));
  j["completed_points"] = done;
  j["total_points"] = total;
  j["complete"] = completed.size() == total;
  j["wall_seconds"] = wall_seconds;
  j["config"] = config_echo;
  return j.dump(2) + "\n";
}

}  // namespace

SweepOutcome run_sweep(const PhysicsConfig& cfg, const GridSettings& grid, const SweepSpec& spec,
                       const SweepOptions& options) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::vector<PointKey> points = spec.points();
  SweepOutcome outcome;
  outcome.spec_hash = hex64(fnv1a(sweep_fingerprint(cfg, grid, spec)));

  std::set<PointKey> completed;
  std::vector<TransmissionResult> rows;
  double previous_wall = 0.0;
  if (options.resume && std::filesystem::exists(options.manifest) &&
      std::filesystem::exists(options.csv)) {
    try {
      const Manifest m = load_manifest(options.manifest);
      if (m.spec_hash == outcome.spec_hash) {
        for (const auto& r : read_results_csv(options.csv)) {
          if (m.completed.contains(r.point)) rows.push_back(r);
        }
        for (const auto& p : m.completed) {
          if (std::ranges::binary_search(points, p)) completed.insert(p);
        }
        previous_wall = m.wall_seconds;
      }
    } catch (const std::exception&) {
      rows.clear();
      completed.clear();
    }
  }
  outcome.reused_points = completed.size();

  struct Task {
    std::size_t point;
    long realization;  // -1 for the GPE run
  };
  std::vector<Task> tasks;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (completed.contains(points[i])) continue;
    pending.push_back(i);
    tasks.push_back({i, -1});
    for (long r = 0; r < spec.realizations; ++r) tasks.push_back({i, r});
  }

  std::mutex mutex;
  std::map<std::size_t, std::vector<TransmissionResult>> partial;
  auto elapsed = [&] {
    return previous_wall + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto persist = [&] {
    write_results_csv(options.csv, rows);
    write_atomic(options.manifest, manifest_text(cfg, grid, spec, outcome.spec_hash, completed,
                                                 points.size(), elapsed(), options.config_echo));
  };

  if (!tasks.empty()) {
    const InitialState init = prepare_initial_state(cfg, grid);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    auto worker = [&] {
      while (!failed) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks.size()) return;
        const Task task = tasks[t];
        const PointKey& p = points[task.point];
        try {
          TransmissionResult r =
              task.realization < 0
                  ? run_point_gpe(init, p, grid)
                  : run_point_bve(init, p, grid, spec.samples, spec.master_seed, task.realization);
          std::lock_guard lock(mutex);
          auto& bucket = partial[task.point];
          bucket.push_back(r);
          if (bucket.size() == static_cast<std::size_t>(spec.realizations + 1)) {
            rows.insert(rows.end(), bucket.begin(), bucket.end());
            partial.erase(task.point);
            completed.insert(p);
            ++outcome.computed_points;
            persist();
            if (options.progress) options.progress(p, completed.size(), points.size());
          }
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    };
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
  } else {
    persist();
  }

  sort_rows(rows);
  outcome.rows = std::move(rows);
  outcome.wall_seconds = elapsed();
  return outcome;
}

namespace {

NamedFit make_fit(std::string quantity, std::string axis, double a_s, double fixed,
                  std::vector<double> x, std::vector<double> y) {
  NamedFit f;
  f.quantity = std::move(quantity);
  f.axis = std::move(axis);
  f.a_s_a0 = a_s;
  f.fixed = fixed;
  f.x = std::move(x);
  f.y = std::move(y);
  try {
    f.fit = f.axis == "width" ? fit_exponential(f.x, f.y) : fit_tanh(f.x, f.y);
  } catch (const FitError& e) {
    f.error = e.what();
  }
  return f;
}

}  // namespace

AnalysisReport analyze(const std::vector<TransmissionResult>& rows, double sigma_c_ref) {
  AnalysisReport report;
  report.tunneling = tunneling_table(rows);
  std::map<PointKey, double> t_gpe;
  for (const auto& r : rows) {
    if (r.source == Source::kGpe) t_gpe[r.point] = r.T;
  }

  // Width series: fixed (a_s, V0/E); height series: fixed (a_s, sigma_b).
  std::map<std::pair<double, double>, std::vector<PointKey>> width, height;
  for (const auto& [p, _] : t_gpe) {
    width[{p.a_s_a0, p.V0_over_E}].push_back(p);
    height[{p.a_s_a0, p.sigma_b_lz}].push_back(p);
  }
  std::map<PointKey, const TunnelingResult*> tun;
  for (const auto& t : report.tunneling) tun[t.point] = &t;

  auto emit = [&](const std::string& axis, double a_s, double fixed, std::vector<PointKey> pts) {
    if (pts.size() < 4) return;
    std::ranges::sort(pts, [&](const PointKey& a, const PointKey& b) {
      return axis == "width" ? a.sigma_b_lz < b.sigma_b_lz : a.V0_over_E < b.V0_over_E;
    });
    std::vector<double> x, yg, xb, yb, yd;
    for (const auto& p : pts) {
      const double xv = axis == "width" ? p.sigma_b_lz / sigma_c_ref : p.V0_over_E;
      x.push_back(xv);
      yg.push_back(t_gpe[p]);
      if (auto it = tun.find(p); it != tun.end()) {
        xb.push_back(xv);
        yb.push_back(it->second->t_bve_mean);
        yd.push_back(it->second->delta_T);
      }
    }
    report.fits.push_back(make_fit("T_GPE", axis, a_s, fixed, x, yg));
    if (xb.size() >= 4) {
      report.fits.push_back(make_fit("T_BVE", axis, a_s, fixed, xb, yb));
      if (axis == "width") report.fits.push_back(make_fit("delta_T", axis, a_s, fixed, xb, yd));
    }
  };
  for (auto& [key, pts] : width) emit("width", key.first, key.second, pts);
  for (auto& [key, pts] : height) emit("height", key.first, key.second, pts);
  return report;
}

std::string report_json(const AnalysisReport& report) {
  json j;
  json tun = json::array();
  for (const auto& t : report.tunneling) {
    tun.push_back({{"a_s_a0", t.point.a_s_a0},
                   {"V0_over_E", t.point.V0_over_E},
                   {"sigma_b_lz", t.point.sigma_b_lz},
                   {"T_GPE", t.t_gpe},
                   {"T_BVE_mean", t.t_bve_mean},
                   {"T_BVE_stderr", t.t_bve_stderr},
                   {"delta_T", t.delta_T},
                   {"error_bar", t.error_bar}});
  }
  j["tunneling"] = tun;
  json fits = json::array();
  for (const auto& f : report.fits) {
    json e = {{"quantity", f.quantity}, {"axis", f.axis}, {"a_s_a0", f.a_s_a0}, {"fixed", f.fixed},
              {"x", f.x}, {"y", f.y}};
    if (f.error.empty()) {
      e["model"] = to_string(f.fit.model);
      e["parameters"] = f.fit.params;
      e["r_squared"] = f.fit.r_squared;
      e["residuals"] = f.fit.residuals;
      e["abscissa"] = f.fit.abscissa;
    } else {
      e["error"] = f.error;
    }
    fits.push_back(e);
  }
  j["fits"] = fits;
  return j.dump(2) + "\n";
}

}  // namespace tunnelsim
