#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "aging/panel.hpp"
#include "aging/simulation.hpp"

namespace aging {

/// Parsed value from the TOML subset we accept: numbers, strings, booleans
/// and flat arrays of those.
struct TomlValue {
  using Scalar = std::variant<double, std::string, bool>;
  std::vector<Scalar> items;
  bool is_array = false;

  double as_number(const std::string& key) const;
  std::int64_t as_integer(const std::string& key) const;
  std::string as_string(const std::string& key) const;
  std::vector<double> as_numbers(const std::string& key) const;
  std::vector<std::string> as_strings(const std::string& key) const;
};

/// "section.key" -> value. Top-level keys have no prefix.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);

struct SweepConfig {
  SimulationConfig base;
  SweepSets sweep;
  std::vector<EstimatorSpec> specs = preset_specs();
  int replications = 200;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool sbd_z_normalize = false;
};

/// Recognized sections: grid, curve, players, missingness, sweep, estimation.
/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults.
SweepConfig sweep_config_from_toml(const std::string& text);
SweepConfig load_sweep_config(const std::string& path);

}  // namespace aging
