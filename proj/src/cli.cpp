#include "ricci/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ricci/diagnostics.hpp"
#include "ricci/io.hpp"
#include "ricci/plot.hpp"
#include "spectral_backend.hpp"

namespace ricci {

namespace fs = std::filesystem;

std::string to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Uniqueness: return "uniqueness";
    case Command::Convergence: return "convergence";
    case Command::Manufactured: return "manufactured";
    case Command::Inequalities: return "inequalities";
  }
  throw std::invalid_argument("unsupported command");
}

Command command_from_string(const std::string& name) {
  for (auto c : {Command::Simulate, Command::Uniqueness, Command::Convergence,
                 Command::Manufactured, Command::Inequalities}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("command", "unknown command '" + name +
                                   "' (expected simulate, uniqueness, convergence, "
                                   "manufactured or inequalities)");
}

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const auto x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range: '" + v + "'");
  }
  return static_cast<int>(x);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) {
    throw ConfigError(key, "expected a nonnegative 64-bit integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw ConfigError(key, "expected a comma separated list of numbers");
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(to_int(key, s));
  if (out.empty()) throw ConfigError(key, "expected a comma separated list of integers");
  return out;
}

template <class Fn>
auto translate(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

// Keys in documentation order. command and surface.kind are applied before
// the rest because they select defaults.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"command", [](RunConfig&, const std::string&, const std::string&) {}},
      {"surface.kind",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.surface = translate(k, [&] { return surface_kind_from_string(v); });
       }},
      {"surface.resolution",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.resolution = to_int(k, v); }},
      {"flow.integrator",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.flow.integrator = translate(k, [&] { return integrator_from_string(v); });
       }},
      {"flow.dt", [](RunConfig& c, const std::string& k, const std::string& v) { c.flow.dt = to_double(k, v); }},
      {"flow.t_end",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.flow.t_end = c.spec.t_end = to_double(k, v);
       }},
      {"flow.store_every",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.flow.store_every = to_int(k, v); }},
      {"flow.cfl_safety",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.flow.cfl_safety = to_double(k, v); }},
      {"flow.volume",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.flow.volume = translate(k, [&] { return volume_control_from_string(v); });
       }},
      {"init.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.seed = to_seed(k, v); }},
      {"init.amplitude",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.initial_amplitude = to_double(k, v);
       }},
      {"init.band_limit",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.band_limit = to_int(k, v); }},
      {"experiment.name", [](RunConfig& c, const std::string&, const std::string& v) { c.spec.name = v; }},
      {"experiment.dt_levels",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.dt_levels = to_doubles(k, v); }},
      {"experiment.horizons",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.horizons = to_doubles(k, v); }},
      {"experiment.candidate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.candidate = translate(k, [&] { return integrator_from_string(v); });
       }},
      {"experiment.candidate_resolution",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.candidate_resolution = to_int(k, v);
       }},
      {"experiment.sobolev_constant",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.sobolev_constant = to_double(k, v);
       }},
      {"experiment.samples",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.samples = to_int(k, v); }},
      {"experiment.trajectories",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.trajectories = to_int(k, v); }},
      {"experiment.resolutions",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.resolutions = to_ints(k, v); }},
      {"experiment.moments",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.moments = to_doubles(k, v); }},
      {"experiment.constant_samples",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.spec.constant_samples = to_bool(k, v);
       }},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.spec.outputs = v; }},
      {"output.plots",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.spec.plots = to_bool(k, v); }},
  };
  return table;
}

void add_entry(std::map<std::string, std::string>& entries, const std::string& line,
               const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(trim(line), "expected 'key = value' (" + where + ")");
  }
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError("<empty>", "missing key (" + where + ")");
  entries[key] = trim(line.substr(eq + 1));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> entries;
  std::istringstream is(text);
  std::string line;
  for (int lineno = 1; std::getline(is, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    add_entry(entries, line, "line " + std::to_string(lineno));
  }
  for (const auto& o : overrides) add_entry(entries, o, "override '" + o + "'");

  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const bool known = std::any_of(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
    if (!known) throw ConfigError(key, "unknown key");
  }

  RunConfig cfg;
  if (auto it = entries.find("command"); it != entries.end()) cfg.command = command_from_string(it->second);
  cfg.spec = default_spec(to_string(cfg.command));
  cfg.flow.t_end = cfg.spec.t_end;
  if (auto it = entries.find("surface.kind"); it != entries.end()) {
    table[1].second(cfg, it->first, it->second);
    if (cfg.spec.surface == SurfaceKind::RoundSphere) cfg.spec.resolution = 31;
  }
  for (const auto& [key, setter] : table) {
    if (key == "command" || key == "surface.kind") continue;
    if (auto it = entries.find(key); it != entries.end()) setter(cfg, key, it->second);
  }
  if (cfg.spec.outputs.empty()) cfg.spec.outputs = "ricci_out";
  // A lone flow.dt drives the ladder of single-level experiments.
  if (entries.count("flow.dt") && !entries.count("experiment.dt_levels") &&
      cfg.command != Command::Simulate) {
    cfg.spec.dt_levels = {cfg.flow.dt};
  }

  try {
    cfg.flow.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto field = msg.substr(0, msg.find(' '));
    throw ConfigError("flow." + field, msg);
  }
  try {
    cfg.spec.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(':')), msg.substr(msg.find(':') + 2));
  }
  if (cfg.spec.band_limit > 0) {
    const auto s = build_surface(cfg.spec.surface, cfg.spec.resolution);
    if (cfg.spec.band_limit > s->backend().max_band_limit()) {
      throw ConfigError("init.band_limit", "must be <= " + std::to_string(s->backend().max_band_limit()) +
                                               " for " + s->describe());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("--config", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  return parse_config(text, overrides);
}

void write_config_kv(std::ostream& os, const RunConfig& cfg) {
  os << "command = " << to_string(cfg.command) << '\n'
     << "flow.integrator = " << to_string(cfg.flow.integrator) << '\n'
     << "flow.dt = " << format_g17(cfg.flow.dt) << '\n'
     << "flow.store_every = " << cfg.flow.store_every << '\n'
     << "flow.cfl_safety = " << format_g17(cfg.flow.cfl_safety) << '\n'
     << "flow.volume = " << to_string(cfg.flow.volume) << '\n';
  write_spec_kv(os, cfg.spec);
}

namespace {

struct Sink {
  fs::path dir;
  std::ofstream open(const std::string& file) const {
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + (dir / file).string());
    return os;
  }
};

int simulate(const RunConfig& cfg, std::ostream& log) {
  const Sink sink{cfg.spec.outputs};
  fs::create_directories(sink.dir);
  {
    auto os = sink.open("config.txt");
    write_config_kv(os, cfg);
  }
  const auto surface = build_surface(cfg.spec.surface, cfg.spec.resolution);
  const auto u0 = random_initial_data(surface, cfg.spec.seed, cfg.spec.band_limit,
                                      cfg.spec.initial_amplitude);
  const auto traj = evolve(u0, cfg.flow);
  const auto records = diagnose(traj);
  {
    auto os = sink.open("diagnostics.csv");
    write_diagnostics_csv(os, records);
  }
  {
    auto os = sink.open("trajectory.bin");
    write_trajectory_binary(os, traj);
  }
  {
    std::ostringstream text;
    write_config_kv(text, cfg);
    std::map<std::string, std::string> kv;
    std::istringstream is(text.str());
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto os = sink.open("trajectory.json");
    write_trajectory_metadata(os, traj, kv);
  }
  {
    auto os = sink.open("final_state.csv");
    write_field_csv(os, traj.states.back());
  }
  if (cfg.spec.plots) {
    LinePlot ep{"Liouville energy", "t", "E(u)", {}, {}, false};
    LinePlot cp{"curvature deviation", "t", "sup |K - Kbar|", {}, {}, true};
    for (const auto& r : records) {
      ep.x.push_back(r.t);
      ep.y.push_back(r.energy);
      cp.x.push_back(r.t);
      cp.y.push_back(r.curv_dev_linf);
    }
    write_svg((sink.dir / "energy.svg").string(), ep);
    write_svg((sink.dir / "curvature_deviation.svg").string(), cp);
  }
  if (!traj.completed()) {
    auto os = sink.open("ABORTED.txt");
    os << traj.message << '\n';
    log << "simulate: aborted after " << traj.times.size() << " stored states: " << traj.message
        << '\n';
    return kExitBlowUp;
  }
  const auto& last = records.back();
  log << "simulate: " << traj.times.size() << " stored states, " << traj.substeps
      << " substeps, final energy " << format_g17(last.energy) << ", volume "
      << format_g17(last.volume) << '\n';
  return kExitSuccess;
}

void report_fit(std::ostream& log, const std::string& label, const FitResult& f) {
  log << label << ": slope " << format_g17(f.slope) << ", correlation "
      << format_g17(f.correlation) << " (" << f.status << ")\n";
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::Simulate:
        return simulate(cfg, log);
      case Command::Uniqueness: {
        const auto r = uniqueness_experiment(cfg.spec);
        report_fit(log, "uniqueness discrepancy vs dt", r.fit);
        for (const auto& rep : r.ladder) {
          log << "  T = " << format_g17(rep.T) << "  delta = " << format_g17(rep.delta) << '\n';
        }
        return kExitSuccess;
      }
      case Command::Convergence: {
        const auto r = convergence_to_constant_curvature(cfg.spec);
        report_fit(log, "log curvature deviation vs t", r.fit);
        return kExitSuccess;
      }
      case Command::Manufactured: {
        const auto r = manufactured_convergence(cfg.spec);
        report_fit(log, "rk4 error vs dt", r.rk4_fit);
        report_fit(log, "imex1 error vs dt", r.imex1_fit);
        return kExitSuccess;
      }
      case Command::Inequalities: {
        const auto r = inequality_campaign(cfg.spec);
        for (const auto& p : r.per_resolution) {
          log << "N = " << p.resolution << ": gn_max " << format_g17(p.gn_max) << ", tm_max "
              << format_g17(p.tm_max) << ", nonfinite moments " << p.nonfinite_moments << '\n';
        }
        log << "sobolev constant " << format_g17(r.sobolev_constant) << '\n';
        return kExitSuccess;
      }
    }
  } catch (const ExperimentAborted& e) {
    err << "aborted: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ricci
