#include "crossover/experiment.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "crossover/error.hpp"

namespace crossover {

namespace {

void append_real(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string real_to_string(double v) {
  std::string s;
  append_real(s, v);
  return s;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kInvalidInput,
                "line " + std::to_string(line) + ": bad field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_csv(const std::vector<MetricsRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.round);
    out += ',';
    append_real(out, r.sim_time);
    out += ',';
    append_real(out, r.global_loss);
    out += ',';
    append_real(out, r.consensus);
    out += ',';
    out += std::to_string(r.bytes_max);
    out += ',';
    out += std::to_string(r.bytes_min);
    out += '\n';
  }
  return out;
}

std::vector<MetricsRecord> parse_csv(std::string_view text) {
  std::vector<MetricsRecord> records;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!header_seen) {
      if (line != kCsvHeader) throw Error(ErrorCode::kInvalidInput, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) {
      throw Error(ErrorCode::kInvalidInput,
                  "line " + std::to_string(line_no) + ": expected 6 fields");
    }
    records.push_back(MetricsRecord{parse_field<std::size_t>(fields[0], line_no),
                                    parse_field<double>(fields[1], line_no),
                                    parse_field<double>(fields[2], line_no),
                                    parse_field<double>(fields[3], line_no),
                                    parse_field<std::size_t>(fields[4], line_no),
                                    parse_field<std::size_t>(fields[5], line_no)});
  }
  if (!header_seen) throw Error(ErrorCode::kInvalidInput, "empty CSV");
  return records;
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

namespace {

std::string summarize(const TrainResult& r) {
  std::string s;
  if (r.records.empty()) {
    s = "no rounds run";
  } else {
    const auto& last = r.records.back();
    s = "final_loss=" + real_to_string(last.global_loss) +
        " optimum_loss=" + real_to_string(r.optimum_loss) +
        " final_consensus=" + real_to_string(last.consensus) +
        " sim_time_s=" + real_to_string(last.sim_time);
  }
  if (r.failure) s += " aborted: " + std::string(r.failure->what());
  return s;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& config) {
  RunOutcome out;
  out.result = train(config.train);
  write_file(config.output_path, format_csv(out.result.records));
  out.summary = summarize(out.result);
  return out;
}

bool is_sweepable(std::string_view key) { return is_config_key(key) && key != "output_path"; }

std::string sweep_run_path(const std::string& output_path, std::string_view key,
                           std::string_view value) {
  const std::filesystem::path p(output_path);
  auto name = p.stem().string() + "_" + std::string(key) + "-" + std::string(value) +
              p.extension().string();
  return (p.parent_path() / name).string();
}

std::string sweep_index_path(const std::string& output_path) {
  const std::filesystem::path p(output_path);
  return (p.parent_path() / (p.stem().string() + "_index.csv")).string();
}

SweepOutcome sweep(const ConfigMap& base, std::string_view key,
                   const std::vector<std::string>& values) {
  if (!is_sweepable(key)) {
    throw Error(ErrorCode::kUsage, "key '" + std::string(key) + "' cannot be swept");
  }
  if (values.empty()) throw Error(ErrorCode::kUsage, "sweep needs at least one value");

  const RunConfig base_cfg = build_config(base);
  std::vector<RunConfig> configs;
  for (const auto& v : values) {
    ConfigMap m = base;
    m[std::string(key)] = v;
    RunConfig cfg = build_config(m);
    cfg.output_path = sweep_run_path(base_cfg.output_path, key, v);
    configs.push_back(std::move(cfg));
  }

  SweepOutcome out;
  out.index_path = sweep_index_path(base_cfg.output_path);
  std::string index = "value,final_loss,final_consensus,total_time\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunOutcome run = run_experiment(configs[i]);
    index += values[i];
    index += ',';
    if (run.result.records.empty()) {
      index += ",,0";
    } else {
      const auto& last = run.result.records.back();
      append_real(index, last.global_loss);
      index += ',';
      append_real(index, last.consensus);
      index += ',';
      append_real(index, last.sim_time);
    }
    index += '\n';
    out.entries.push_back({values[i], configs[i].output_path, std::move(run.result)});
  }
  write_file(out.index_path, index);
  return out;
}

}  // namespace crossover
