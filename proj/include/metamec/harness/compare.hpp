#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "metamec/harness/runner.hpp"

namespace metamec {

/// First episode counted in the final window: the last 10% of training.
inline std::size_t final_window_start(std::size_t episodes) {
  const std::size_t window = std::max<std::size_t>(1, episodes / 10);
  return episodes - window + 1;
}

/// Mean of `metric` over rows whose episode falls in the final window.
inline std::optional<double> final_window_mean(const std::vector<MetricRow>& rows, const std::string& metric,
                                               std::size_t episodes) {
  const auto start = static_cast<std::int64_t>(final_window_start(episodes));
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.metric != metric || r.episode < start) continue;
    sum += r.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct RunSummary {
  std::string run_id;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::map<std::string, double> final_window;  // eval metric -> final-window mean
  bool diverged = false;
};

struct Comparison {
  std::vector<MetricRow> rows;  // learning curves followed by final-window rows
  std::vector<RunSummary> runs;
};

/// Trains every config on every seed (paired: identical environment streams
/// per seed) and gathers curves plus final-window summaries. Summary rows use
/// metric "final_window_<metric>" at episode = configured episode count.
inline Comparison compare(std::vector<ExperimentConfig> configs, const std::vector<std::uint64_t>& seeds,
                          unsigned max_parallel = std::max(1u, std::thread::hardware_concurrency())) {
  if (configs.empty()) throw InvalidArgument("compare: no configs");
  if (seeds.empty()) throw InvalidArgument("compare: no seeds");
  for (const auto& c : configs)
    if (!(c.env == configs.front().env)) throw InvalidArgument("compare: configs must share the same env block");

  std::set<std::string> used;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string id = configs[i].run_id;
    for (std::size_t dup = 2; used.count(id); ++dup) id = configs[i].run_id + "-" + std::to_string(dup);
    used.insert(id);
    configs[i].run_id = id;
  }

  struct Job {
    ExperimentConfig cfg;
  };
  std::vector<Job> jobs;
  for (const auto& c : configs)
    for (std::uint64_t s : seeds) {
      Job j{c};
      j.cfg.seed = s;
      jobs.push_back(std::move(j));
    }

  std::vector<TrainResult> results;
  results.reserve(jobs.size());
  for (std::size_t begin = 0; begin < jobs.size(); begin += max_parallel) {
    const std::size_t end = std::min(jobs.size(), begin + max_parallel);
    std::vector<std::future<TrainResult>> batch;
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(max_parallel > 1 ? std::launch::async : std::launch::deferred,
                                 [cfg = jobs[i].cfg] { return train(cfg); }));
    for (auto& f : batch) results.push_back(f.get());
  }

  Comparison out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& cfg = jobs[i].cfg;
    const auto& res = results[i];
    out.rows.insert(out.rows.end(), res.rows.begin(), res.rows.end());
    RunSummary s{cfg.run_id, std::string(to_string(cfg.agent.algorithm)), cfg.seed, {}, res.divergence.has_value()};
    for (const auto& m : eval_metric_names(cfg.env))
      if (auto v = final_window_mean(res.rows, m, cfg.training.episodes)) s.final_window[m] = *v;
    out.runs.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& cfg = jobs[i].cfg;
    for (const auto& [metric, v] : out.runs[i].final_window)
      out.rows.push_back({cfg.run_id, out.runs[i].algorithm, cfg.env.name(), cfg.seed,
                          static_cast<std::int64_t>(cfg.training.episodes), "final_window_" + metric, v});
  }
  return out;
}

}  // namespace metamec
