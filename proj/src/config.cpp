#include "tunnelsim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>

#include "tunnelsim/error.hpp"
#include "tunnelsim/results_io.hpp"

namespace tunnelsim {

BarrierSpec BarrierInput::resolve(const PhysicsConfig& physics) const {
  const double E = 0.5 * physics.kick_k * physics.kick_k;
  BarrierSpec b;
  b.V0 = V0.value_or(V0_over_E * E);
  b.sigma_b = sigma_b;
  b.z0_prime = z0_prime.value_or(place_barrier(physics.trap_center, sigma_b, physics.sigma_c_ref));
  b.validate();
  return b;
}

SweepSpec SweepSettings::build(const PhysicsConfig& physics, std::uint64_t master_seed) const {
  SweepSpec s;
  if (kind == "width") {
    s = a_s ? width_sweep(physics, *a_s, width_points) : width_sweep(physics, {-0.5, 0.0, 0.5}, width_points);
  } else if (kind == "height_scatter") {
    s = height_scatter_sweep(physics, height_points, scattering_points);
  } else if (kind == "custom") {
    s.name = "custom";
    s.a_s = {physics.a_s_quench};
    s.V0_over_E = {1.0};
    s.sigma_b = {1.0};
    s.realizations = physics.realizations;
    s.samples = physics.samples;
  } else {
    throw ConfigError("sweep.kind must be width, height_scatter or custom, got '" + kind + "'");
  }
  if (a_s) s.a_s = *a_s;
  if (V0_over_E) s.V0_over_E = *V0_over_E;
  if (sigma_b) s.sigma_b = *sigma_b;
  s.master_seed = master_seed;
  s.validate();
  return s;
}

void RunConfig::validate() const {
  physics.validate();
  grid.validate();
  barrier.resolve(physics);
  sweep.build(physics, seed);
  if (output.trajectory_every <= 0 || output.phase_space_every <= 0) {
    throw ConfigError("output strides must be positive");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Value {
  std::vector<double> numbers;
  std::string unit;
  std::string raw;
};

class Parser {
 public:
  Parser(std::string_view origin, std::size_t line) : origin_(origin), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(std::string(origin_) + ":" + std::to_string(line_) + ": " + msg);
  }

  // "1, 2.5, 3 unit" -> numbers + unit.
  Value numbers(std::string_view text) const {
    Value v;
    v.raw = std::string(text);
    std::string_view rest = text;
    while (true) {
      rest = trim(rest);
      double d = 0.0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
      if (ec != std::errc()) fail("expected a number in '" + std::string(text) + "'");
      v.numbers.push_back(d);
      rest = trim(rest.substr(static_cast<std::size_t>(ptr - rest.data())));
      if (!rest.empty() && rest.front() == ',') {
        rest.remove_prefix(1);
        continue;
      }
      break;
    }
    v.unit = std::string(rest);
    if (v.unit.find_first_of(" \t,") != std::string::npos) fail("malformed value '" + std::string(text) + "'");
    return v;
  }

 private:
  std::string_view origin_;
  std::size_t line_;
};

using Handler = std::function<void(RunConfig&, const Parser&, std::string_view)>;

// Unit -> scale factor into internal units.
double scale_for(const Parser& p, const std::string& unit, const std::map<std::string, double>& allowed,
                 const std::string& fallback) {
  const std::string& u = unit.empty() ? fallback : unit;
  const auto it = allowed.find(u);
  if (it == allowed.end()) {
    std::string list;
    for (const auto& [k, _] : allowed) list += (list.empty() ? "" : ", ") + (k.empty() ? "(none)" : k);
    p.fail("unit '" + u + "' not accepted here (allowed: " + list + ")");
  }
  return it->second;
}

double scalar(const Parser& p, std::string_view text, const std::map<std::string, double>& units,
              const std::string& fallback) {
  const Value v = p.numbers(text);
  if (v.numbers.size() != 1) p.fail("expected a single value");
  return v.numbers[0] * scale_for(p, v.unit, units, fallback);
}

long integer(const Parser& p, std::string_view text) {
  const Value v = p.numbers(text);
  if (v.numbers.size() != 1 || !v.unit.empty()) p.fail("expected a single integer");
  const double d = v.numbers[0];
  if (d != std::floor(d) || std::abs(d) > 9.0e15) p.fail("expected an integer, got " + v.raw);
  return static_cast<long>(d);
}

bool boolean(const Parser& p, std::string_view text) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  p.fail("expected a boolean, got '" + std::string(t) + "'");
}

const std::map<std::string, double> kNone{{"", 1.0}};
const std::map<std::string, double> kLength{{"lz", 1.0}, {"", 1.0}};
const std::map<std::string, double> kEnergy{{"hbar_wz", 1.0}, {"", 1.0}};
const std::map<std::string, double> kTime{{"1/wz", 1.0}, {"", 1.0}};
const std::map<std::string, double> kBohr{{"a0", 1.0}, {"", 1.0}};
const std::map<std::string, double> kFrequency{{"Hz", constants::kTwoPi}, {"rad/s", 1.0}};
const std::map<std::string, double> kMass{{"u", constants::kAtomicMassUnit}, {"kg", 1.0}};
const std::map<std::string, double> kWavenumber{{"1/lz", 1.0}, {"", 1.0}};

std::map<std::string, Handler, std::less<>> handlers() {
  std::map<std::string, Handler, std::less<>> h;
  // physics
  h["physics.atom_number"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.atom_number = scalar(p, v, kNone, "");
  };
  h["physics.mass"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.mass = scalar(p, v, kMass, "kg");
  };
  h["physics.omega_perp"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.omega_perp = scalar(p, v, kFrequency, "rad/s");
  };
  h["physics.omega_z"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.omega_z = scalar(p, v, kFrequency, "rad/s");
  };
  h["physics.a_s_initial"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.a_s_initial = scalar(p, v, kBohr, "a0");
  };
  h["physics.a_s_quench"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.a_s_quench = scalar(p, v, kBohr, "a0");
  };
  h["physics.kick_k"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.kick_k = scalar(p, v, kWavenumber, "1/lz");
  };
  h["physics.trap_center"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.trap_center = scalar(p, v, kLength, "lz");
  };
  h["physics.sigma_c_ref"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.physics.sigma_c_ref = scalar(p, v, kLength, "lz");
  };
  // barrier (sigma_c resolved after the whole file is read)
  h["barrier.V0"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.barrier.V0 = scalar(p, v, kEnergy, "hbar_wz");
  };
  h["barrier.V0_over_E"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.barrier.V0_over_E = scalar(p, v, kNone, "");
  };
  h["barrier.z0_prime"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.barrier.z0_prime = scalar(p, v, kLength, "lz");
  };
  // grid
  h["grid.z_min"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.grid.z_min = scalar(p, v, kLength, "lz"); };
  h["grid.z_max"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.grid.z_max = scalar(p, v, kLength, "lz"); };
  h["grid.n_points"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const long n = integer(p, v);
    if (n <= 0) p.fail("grid.n_points must be positive");
    c.grid.n_points = static_cast<std::size_t>(n);
  };
  h["grid.dt"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.grid.dt = scalar(p, v, kTime, "1/wz"); };
  h["grid.observer_every"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.grid.observer_every = integer(p, v); };
  h["grid.t_cap"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.grid.t_cap = scalar(p, v, kTime, "1/wz"); };
  h["grid.edge_margin"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.grid.edge_margin = scalar(p, v, kLength, "lz");
  };
  h["grid.ground_state_points"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const long n = integer(p, v);
    if (n <= 0) p.fail("grid.ground_state_points must be positive");
    c.grid.ground_state_points = static_cast<std::size_t>(n);
  };
  h["grid.ground_state_dtau"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.grid.ground_state_dtau = scalar(p, v, kTime, "1/wz");
  };
  h["grid.ground_state_tolerance"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.grid.ground_state_tolerance = scalar(p, v, kNone, "");
  };
  // bve
  h["bve.samples"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.physics.samples = integer(p, v); };
  h["bve.realizations"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.physics.realizations = integer(p, v); };
  h["bve.seed"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const long s = integer(p, v);
    if (s < 0) p.fail("bve.seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  };
  // sweep
  h["sweep.kind"] = [](RunConfig& c, const Parser&, std::string_view v) { c.sweep.kind = std::string(trim(v)); };
  h["sweep.a_s"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const Value val = p.numbers(v);
    scale_for(p, val.unit, kBohr, "a0");
    c.sweep.a_s = val.numbers;
  };
  h["sweep.V0_over_E"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const Value val = p.numbers(v);
    scale_for(p, val.unit, kNone, "");
    c.sweep.V0_over_E = val.numbers;
  };
  h["sweep.width_points"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.sweep.width_points = int(integer(p, v)); };
  h["sweep.height_points"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.sweep.height_points = int(integer(p, v)); };
  h["sweep.scattering_points"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.sweep.scattering_points = int(integer(p, v));
  };
  // output
  h["output.dir"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    const std::string_view t = trim(v);
    if (t.empty()) p.fail("output.dir must not be empty");
    c.output.dir = std::string(t);
  };
  h["output.trajectory"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.output.trajectory = boolean(p, v); };
  h["output.trajectory_every"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.output.trajectory_every = integer(p, v);
  };
  h["output.phase_space"] = [](RunConfig& c, const Parser& p, std::string_view v) { c.output.phase_space = boolean(p, v); };
  h["output.phase_space_every"] = [](RunConfig& c, const Parser& p, std::string_view v) {
    c.output.phase_space_every = integer(p, v);
  };
  return h;
}

const std::map<std::string, double> kWidthUnits{{"lz", 1.0}, {"", 1.0}, {"sigma_c", -1.0}};

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string_view origin) {
  static const auto table = handlers();
  RunConfig cfg;
  cfg.text = std::string(text);
  std::string section;
  // sigma_b values may be given in sigma_c units, which depend on physics.sigma_c_ref.
  struct Deferred {
    std::size_t line;
    std::string key;
    Value value;
  };
  std::vector<Deferred> widths;
  std::map<std::string, std::size_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const Parser parser(origin, line_no);
    if (line.front() == '[') {
      if (line.back() != ']') parser.fail("malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"physics", "barrier", "grid", "bve", "sweep", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        parser.fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parser.fail("expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) parser.fail("missing key");
    if (value.empty()) parser.fail("missing value for '" + key + "'");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) parser.fail("key '" + key + "' outside a section; use section.key");
      key = section + "." + key;
    }
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      parser.fail("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    }
    if (key == "barrier.sigma_b" || key == "sweep.sigma_b") {
      Value v = parser.numbers(value);
      scale_for(parser, v.unit, kWidthUnits, "lz");
      if (key == "barrier.sigma_b" && v.numbers.size() != 1) parser.fail("expected a single value");
      widths.push_back({line_no, key, std::move(v)});
      continue;
    }
    const auto it = table.find(key);
    if (it == table.end()) parser.fail("unknown key '" + key + "'");
    it->second(cfg, parser, value);
  }

  for (const auto& w : widths) {
    const double scale = w.value.unit == "sigma_c" ? cfg.physics.sigma_c_ref : 1.0;
    std::vector<double> v = w.value.numbers;
    for (auto& x : v) x *= scale;
    if (w.key == "barrier.sigma_b") {
      cfg.barrier.sigma_b = v[0];
    } else {
      cfg.sweep.sigma_b = v;
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_run_config(text, path.string());
}

std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag,
                                         const OutputSettings& output) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TUNNELSIM_OUT"); env && *env) return env;
  if (!output.dir.empty()) return output.dir;
  return "tunnelsim_out";
}

}  // namespace tunnelsim
