#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wyflow/background.hpp"
#include "wyflow/flow.hpp"

namespace wyflow {

/// Raised for malformed or unknown configuration entries.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// w0 = value (constant), value + amplitude·cos(frequency·π·(s - s0)/L) (trig), or a field file.
struct InitialSpec {
  std::string kind = "constant";
  double value = 1.0;
  double amplitude = 0.0;
  double frequency = 2.0;
  std::string path;
};

struct VerifySpec {
  std::vector<std::string> suites{"direct_curvature", "ibp", "dense_spectrum", "dr_dt"};
  double order_min = 1.5;
  double eig_rel = 1e-8;
  double ratio_lo = 1.5;
  double ratio_hi = 3.0;
  int seeds = 10;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::string family = "flat_interval";
  FamilyParams params;
  std::size_t mesh = 256;
  InitialSpec initial;
  FlowConfig flow;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::size_t spectrum_k = 6;
  VerifySpec verify;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ScenarioConfig preset(const std::string& name);

/// Applies `[section]` / `key = value` text on top of `config`. Unknown sections or keys,
/// malformed lines and unparsable values throw ConfigError naming `source` and the line.
void apply_ini(ScenarioConfig& config, const std::string& text, const std::string& source = "<config>");

/// Base preset (the flag wins over `[scenario] name` in the file), then the file on top.
ScenarioConfig load_config(const std::optional<std::string>& scenario,
                           const std::optional<std::filesystem::path>& config_path);

/// Complete effective configuration; apply_ini(to_ini(c)) reproduces c.
std::string to_ini(const ScenarioConfig& config);

Background build_scenario_background(const ScenarioConfig& config);
Background build_scenario_background(const ScenarioConfig& config, std::size_t mesh);
Field initial_field(const Background& bg, const ScenarioConfig& config);

}  // namespace wyflow
