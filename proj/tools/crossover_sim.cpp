// crossover_sim: run gossip-averaging experiments on a simulated cluster.
//
//   crossover_sim run   [--config FILE] [--<key> VALUE ...]
//   crossover_sim sweep [--config FILE] [--<key> VALUE ...] --vary KEY --values A,B,...
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossover/config.hpp"
#include "crossover/error.hpp"
#include "crossover/experiment.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string config_file;
  std::map<std::string, std::optional<std::string>> values;
};

void add_config_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config_file, "key=value config file; flags override it");
  for (const auto& key : crossover::config_keys()) {
    auto& slot = flags.values[std::string(key.name)];
    std::string help(key.help);
    if (!key.default_value.empty()) help += " [default: " + std::string(key.default_value) + "]";
    cmd.add_option("--" + std::string(key.name), slot, help);
  }
}

crossover::ConfigMap collect(const Flags& flags) {
  crossover::ConfigMap file;
  if (!flags.config_file.empty()) file = crossover::read_config_file(flags.config_file);
  crossover::ConfigMap overrides;
  for (const auto& [k, v] : flags.values) {
    if (v) overrides[k] = *v;
  }
  return crossover::merge_config(std::move(file), overrides);
}

int exit_code_for(const crossover::Error& e) {
  return e.code() == crossover::ErrorCode::kUsage ? kExitUsage : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated Crossover-SGD and baseline gossip protocols"};
  app.require_subcommand(0, 1);

  Flags run_flags;
  auto* run_cmd = app.add_subcommand("run", "train once and write the metrics CSV");
  add_config_flags(*run_cmd, run_flags);

  Flags sweep_flags;
  std::string vary;
  std::vector<std::string> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per value of one key");
  add_config_flags(*sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--vary", vary, "config key to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sweep_cmd) {
      const auto base = collect(sweep_flags);
      const auto outcome = crossover::sweep(base, vary, sweep_values);
      int rc = 0;
      for (const auto& entry : outcome.entries) {
        std::cout << vary << "=" << entry.value << " -> " << entry.csv_path << "\n";
        if (entry.result.failure) {
          std::cerr << "run " << vary << "=" << entry.value
                    << " aborted: " << entry.result.failure->what() << "\n";
          rc = kExitRuntime;
        }
      }
      std::cout << "index: " << outcome.index_path << "\n";
      return rc;
    }

    const auto config = crossover::build_config(collect(run_flags));
    const auto outcome = crossover::run_experiment(config);
    std::cout << outcome.summary << "\n";
    if (outcome.result.failure) return kExitRuntime;
    return 0;
  } catch (const crossover::Error& e) {
    std::cerr << "error (" << crossover::to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
