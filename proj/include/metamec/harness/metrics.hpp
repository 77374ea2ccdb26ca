#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "metamec/errors.hpp"

namespace metamec {

inline constexpr const char* kMetricsHeader = "run_id,algorithm,env,seed,episode,metric,value";

struct MetricRow {
  std::string run_id;
  std::string algorithm;
  std::string env;
  std::uint64_t seed = 0;
  std::int64_t episode = 0;
  std::string metric;
  double value = 0.0;

  bool operator==(const MetricRow&) const = default;
};

/// Shortest "%.17g" rendering; parses back to the identical double.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv_line(const MetricRow& r) {
  return r.run_id + "," + r.algorithm + "," + r.env + "," + std::to_string(r.seed) + "," +
         std::to_string(r.episode) + "," + r.metric + "," + format_value(r.value);
}

inline std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += to_csv_line(r) + "\n";
  return out;
}

inline void write_metrics(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write metrics to " + path);
  out << metrics_csv(rows);
  if (!out) throw IoError("failed while writing " + path);
}

inline MetricRow parse_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 7) throw InvalidArgument("metrics row must have 7 fields: " + line);
  MetricRow r;
  r.run_id = f[0];
  r.algorithm = f[1];
  r.env = f[2];
  r.seed = std::stoull(f[3]);
  r.episode = std::stoll(f[4]);
  r.metric = f[5];
  r.value = std::stod(f[6]);
  return r;
}

inline std::vector<MetricRow> read_metrics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read metrics from " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw InvalidArgument(path + ": unexpected metrics header");
  std::vector<MetricRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_line(line));
  return rows;
}

}  // namespace metamec
