#pragma once

// Run configuration: flat key=value files and --key value flags share one
// key space. Flags override file values.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossover/harness.hpp"

namespace crossover {

struct RunConfig {
  TrainConfig train;
  std::string output_path = "metrics.csv";
};

using ConfigMap = std::map<std::string, std::string, std::less<>>;

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Every accepted key, in --help order.
std::span<const ConfigKey> config_keys();

bool is_config_key(std::string_view key);

// One key=value per line; '#' starts a comment; blank lines ignored.
// Throws kUsage on malformed lines, unknown or repeated keys.
ConfigMap parse_config_text(std::string_view text);
ConfigMap read_config_file(const std::string& path);

// `overrides` wins over `base`.
ConfigMap merge_config(ConfigMap base, const ConfigMap& overrides);

// Builds and validates a RunConfig. Throws kUsage naming the offending key
// for bad values and for method/topology conflicts.
RunConfig build_config(const ConfigMap& values);

}  // namespace crossover
