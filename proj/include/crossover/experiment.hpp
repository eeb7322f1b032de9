#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crossover/config.hpp"
#include "crossover/harness.hpp"

namespace crossover {

inline constexpr std::string_view kCsvHeader =
    "round,sim_time_s,global_loss,consensus_distance,bytes_max,bytes_min";

// Header plus one row per record. Reals use the shortest representation
// that parses back to the same double.
std::string format_csv(const std::vector<MetricsRecord>& records);
// Inverse of format_csv. Throws kInvalidInput on schema mismatch.
std::vector<MetricsRecord> parse_csv(std::string_view text);

// Throws kIo if the file cannot be written.
void write_file(const std::string& path, std::string_view content);

struct RunOutcome {
  TrainResult result;
  std::string summary;
};

// Trains, writes the CSV (partial on divergence) and returns a one-line
// summary: final loss, final consensus, total simulated time.
RunOutcome run_experiment(const RunConfig& config);

struct SweepEntry {
  std::string value;
  std::string csv_path;
  TrainResult result;
};

struct SweepOutcome {
  std::vector<SweepEntry> entries;
  std::string index_path;
};

// Keys that may be varied by sweep(); everything but output_path.
bool is_sweepable(std::string_view key);

// Output paths for a sweep derived from the base output_path: runs go to
// <stem>_<key>-<value><ext>, the index to <stem>_index.csv.
std::string sweep_run_path(const std::string& output_path, std::string_view key,
                           std::string_view value);
std::string sweep_index_path(const std::string& output_path);

// One run per value; each run's CSV plus an index with columns
// value,final_loss,final_consensus,total_time. Every value is validated
// before anything runs.
SweepOutcome sweep(const ConfigMap& base, std::string_view key,
                   const std::vector<std::string>& values);

}  // namespace crossover
