#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricci/experiments.hpp"
#include "ricci/flow.hpp"

namespace ricci {

enum class Command { Simulate, Uniqueness, Convergence, Manufactured, Inequalities };

std::string to_string(Command command);
Command command_from_string(const std::string& name);

/// Configuration problem attributed to one key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  Command command = Command::Simulate;
  /// Surface, seed, initial data, ladders and outputs. flow.t_end is mirrored
  /// into spec.t_end.
  ExperimentSpec spec = default_spec("simulate");
  /// Integrator settings of the simulate command.
  FlowConfig flow;
};

/// Flat "key = value" text; '#' starts a comment. overrides are "key=value"
/// strings applied after the text, so they win. Unknown keys, malformed
/// values and violated constraints throw ConfigError naming the key.
///
/// Keys: command, surface.kind, surface.resolution, flow.integrator, flow.dt,
/// flow.t_end, flow.store_every, flow.cfl_safety, flow.volume, init.seed,
/// init.amplitude, init.band_limit, experiment.name, experiment.dt_levels,
/// experiment.horizons, experiment.candidate, experiment.candidate_resolution,
/// experiment.sobolev_constant, experiment.samples, experiment.trajectories,
/// experiment.resolutions, experiment.moments, experiment.constant_samples,
/// output.dir, output.plots.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Reads the file at path (empty path: no file) and calls parse_config.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every resolved key, one "key = value" line each, in the order above.
void write_config_kv(std::ostream& os, const RunConfig& cfg);

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBlowUp = 2;

/// Runs the configured command, writing its artifacts under spec.outputs and a
/// short report to log. Returns kExitSuccess, kExitBlowUp after a guard trip
/// (partial outputs are kept) or kExitUsage for configuration errors.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace ricci
