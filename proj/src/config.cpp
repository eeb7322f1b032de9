#include "crossover/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crossover/error.hpp"
#include "crossover/topology.hpp"

namespace crossover {

namespace {

constexpr std::array kKeys = {
    ConfigKey{"method", "crossover",
              "crossover | hier-crossover | sgp-pushsum | ring | allreduce"},
    ConfigKey{"workers", "8", "number of simulated workers (>= 2)"},
    ConfigKey{"segments", "4", "model segments exchanged per round (<= layers)"},
    ConfigKey{"layers", "8", "layers the model vector is split into"},
    ConfigKey{"dim", "64", "total parameter count"},
    ConfigKey{"rounds", "500", "communication rounds"},
    ConfigKey{"seed", "42", "seed for task, initialization and topologies"},
    ConfigKey{"group_size", "2", "workers per group for hier-crossover"},
    ConfigKey{"comm_interval", "1", "gradients accumulated per communication round"},
    ConfigKey{"lr", "0.005", "base learning rate"},
    ConfigKey{"momentum", "0.96", "SGD momentum"},
    ConfigKey{"weight_decay", "5e-05", "L2 weight decay"},
    ConfigKey{"lars_coeff", "off", "LARS trust coefficient, or off"},
    ConfigKey{"warmup_epochs", "0", "linear warmup length in epochs (0 disables)"},
    ConfigKey{"rounds_per_epoch", "10", "rounds counted as one epoch"},
    ConfigKey{"link", "aws", "link preset setting latency and bandwidth: aws | neuron"},
    ConfigKey{"latency", "", "seconds per message (overrides the preset)"},
    ConfigKey{"bandwidth", "", "bytes per second (overrides the preset)"},
    ConfigKey{"element_size", "4", "bytes per parameter element: 2, 4 or 8"},
    ConfigKey{"topology_overhead", "0", "seconds per segment charged for topology draws"},
    ConfigKey{"target_spread", "1", "half-width of the per-worker target range"},
    ConfigKey{"curvature_spread", "0.1", "relative per-worker curvature jitter in [0, 1)"},
    ConfigKey{"output_path", "metrics.csv", "CSV output file"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCode::kUsage, "invalid value '" + std::string(value) + "' for key '" +
                                     std::string(key) + "': " + std::string(why));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, text, "not a number");
  return value;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  if (!text.empty() && text.front() == '-') bad_value(key, text, "must be nonnegative");
  return parse_number<std::size_t>(key, text);
}

double parse_real(std::string_view key, std::string_view text) {
  const double v = parse_number<double>(key, text);
  if (!std::isfinite(v)) bad_value(key, text, "must be finite");
  return v;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

bool is_config_key(std::string_view key) {
  for (const auto& k : kKeys) {
    if (k.name == key) return true;
  }
  return false;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kUsage,
                  "line " + std::to_string(line_no) + ": expected key=value, got '" +
                      std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!is_config_key(key)) {
      throw Error(ErrorCode::kUsage,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!out.emplace(key, value).second) {
      throw Error(ErrorCode::kUsage,
                  "line " + std::to_string(line_no) + ": key '" + key + "' set twice");
    }
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ConfigMap merge_config(ConfigMap base, const ConfigMap& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

RunConfig build_config(const ConfigMap& values) {
  for (const auto& [k, v] : values) {
    if (!is_config_key(k)) throw Error(ErrorCode::kUsage, "unknown key '" + k + "'");
  }
  auto get = [&](std::string_view key) -> std::string_view {
    if (const auto it = values.find(key); it != values.end()) return it->second;
    for (const auto& k : kKeys) {
      if (k.name == key) return k.default_value;
    }
    return {};
  };

  RunConfig cfg;
  TrainConfig& t = cfg.train;
  try {
    t.method = parse_method(get("method"));
  } catch (const Error& e) {
    bad_value("method", get("method"), e.what());
  }
  t.workers = parse_count("workers", get("workers"));
  t.segments = parse_count("segments", get("segments"));
  t.layers = parse_count("layers", get("layers"));
  t.dim = parse_count("dim", get("dim"));
  t.rounds = parse_count("rounds", get("rounds"));
  t.seed = parse_number<std::uint64_t>("seed", get("seed"));
  t.group_size = parse_count("group_size", get("group_size"));
  t.rounds_per_epoch = parse_count("rounds_per_epoch", get("rounds_per_epoch"));

  OptimizerConfig& o = t.optimizer;
  o.comm_interval = parse_count("comm_interval", get("comm_interval"));
  o.base_lr = parse_real("lr", get("lr"));
  o.momentum = parse_real("momentum", get("momentum"));
  o.weight_decay = parse_real("weight_decay", get("weight_decay"));
  o.warmup_epochs = parse_count("warmup_epochs", get("warmup_epochs"));
  if (const auto lars = get("lars_coeff"); lars == "off" || lars == "none") {
    o.lars_coeff.reset();
  } else {
    o.lars_coeff = parse_real("lars_coeff", lars);
  }

  if (const auto preset = get("link"); preset == "aws") {
    t.link = LinkModel::aws();
  } else if (preset == "neuron") {
    t.link = LinkModel::neuron();
  } else {
    bad_value("link", preset, "expected aws or neuron");
  }
  if (const auto v = get("latency"); !v.empty()) t.link.latency = parse_real("latency", v);
  if (const auto v = get("bandwidth"); !v.empty()) t.link.bandwidth = parse_real("bandwidth", v);
  t.link.element_size = parse_count("element_size", get("element_size"));
  t.cost.topology_overhead = parse_real("topology_overhead", get("topology_overhead"));
  t.task.target_spread = parse_real("target_spread", get("target_spread"));
  t.task.curvature_spread = parse_real("curvature_spread", get("curvature_spread"));
  cfg.output_path = std::string(get("output_path"));

  // Field-level checks, reported against the key that carries the value.
  auto require = [&](bool ok, std::string_view key, std::string_view why) {
    if (!ok) bad_value(key, get(key), why);
  };
  require(t.workers >= 2, "workers", "need at least 2 workers");
  require(t.layers >= 1, "layers", "need at least 1 layer");
  require(t.dim >= t.layers, "dim", "must be at least the number of layers");
  require(t.segments >= 1 && t.segments <= t.layers, "segments", "must lie in [1, layers]");
  require(t.rounds_per_epoch >= 1, "rounds_per_epoch", "must be at least 1");
  require(o.comm_interval >= 1, "comm_interval", "must be at least 1");
  require(o.base_lr > 0.0, "lr", "must be positive");
  require(o.momentum >= 0.0 && o.momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(o.weight_decay >= 0.0, "weight_decay", "must be nonnegative");
  require(!o.lars_coeff || *o.lars_coeff >= 0.0, "lars_coeff", "must be nonnegative or off");
  require(t.link.latency >= 0.0, "latency", "must be nonnegative");
  require(t.link.bandwidth > 0.0, "bandwidth", "must be positive");
  require(t.link.element_size == 2 || t.link.element_size == 4 || t.link.element_size == 8,
          "element_size", "must be 2, 4 or 8");
  require(t.cost.topology_overhead >= 0.0, "topology_overhead", "must be nonnegative");
  require(t.task.target_spread >= 0.0, "target_spread", "must be nonnegative");
  require(t.task.curvature_spread >= 0.0 && t.task.curvature_spread < 1.0, "curvature_spread",
          "must lie in [0, 1)");
  require(!cfg.output_path.empty(), "output_path", "must not be empty");
  if (t.method == Method::kSgpPushsum) {
    require(is_power_of_two(t.workers), "workers",
            "sgp-pushsum runs on the exponential graph and needs a power-of-two worker count");
  }
  if (t.method == Method::kHierCrossover) {
    require(t.group_size >= 1 && t.group_size <= t.workers, "group_size",
            "must lie in [1, workers]");
  }
  try {
    t.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kUsage, e.what());
  }
  return cfg;
}

}  // namespace crossover
