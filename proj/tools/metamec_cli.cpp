// Command-line front end: train, eval, compare, gradcheck, presets.
//
// Exit codes: 0 success, 1 I/O or usage failure, 2 config error, 3 divergence.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metamec/metamec.hpp"

namespace fs = std::filesystem;
using namespace metamec;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("--seeds: \"" + item + "\" is not a non-negative integer");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds: empty list");
  return seeds;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

int run_train(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  ensure_dir(cfg.output_dir);
  const auto result = train(cfg);
  const std::string stem = (fs::path(cfg.output_dir) / (cfg.run_id + "_seed" + std::to_string(cfg.seed))).string();
  write_metrics(result.rows, stem + ".csv");
  save_params(result.agent, stem + ".params.json");
  if (result.divergence) {
    std::cerr << "training diverged: " << *result.divergence << "\n";
    return kExitDivergence;
  }
  std::cout << "wrote " << stem << ".csv and " << stem << ".params.json\n";
  return 0;
}

int run_eval(const std::string& params_path, const std::string& config_path, std::optional<std::uint64_t> seed,
             std::optional<std::size_t> episodes) {
  const ExperimentConfig cfg = load_config(config_path);
  Agent agent = make_agent(cfg);
  load_params(agent, params_path);
  const auto summary =
      evaluate(agent, cfg.env, episodes.value_or(cfg.training.eval_episodes), seed.value_or(cfg.seed));
  std::cout << "metric,mean,stddev\n";
  for (const auto& [name, s] : summary) std::cout << name << "," << format_value(s.mean) << "," << format_value(s.stddev) << "\n";
  return 0;
}

int run_compare(const std::vector<std::string>& config_paths, const std::string& seeds_text, const std::string& out) {
  std::vector<ExperimentConfig> configs;
  for (const auto& p : config_paths) configs.push_back(load_config(p));
  const auto seeds = parse_seed_list(seeds_text);
  Comparison cmp;
  try {
    cmp = compare(configs, seeds);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  ensure_dir(out);
  const std::string path = (fs::path(out) / "compare.csv").string();
  write_metrics(cmp.rows, path);
  bool diverged = false;
  std::cout << "run_id,algorithm,seed,metric,final_window_mean\n";
  for (const auto& r : cmp.runs) {
    diverged = diverged || r.diverged;
    for (const auto& [m, v] : r.final_window)
      std::cout << r.run_id << "," << r.algorithm << "," << r.seed << "," << m << "," << format_value(v) << "\n";
  }
  std::cout << "wrote " << path << "\n";
  return diverged ? kExitDivergence : 0;
}

int run_gradcheck() {
  const auto report = gradcheck_all();
  for (const auto& e : report.entries)
    std::printf("%-32s max_rel_error=%.3e\n", e.architecture.c_str(), e.max_rel_error);
  std::printf("%-32s (no trainable parameters)\n", "random");
  std::printf("overall max_rel_error=%.3e %s\n", report.max_rel_error, report.max_rel_error <= 1e-4 ? "PASS" : "FAIL");
  return report.max_rel_error <= 1e-4 ? 0 : kExitIo;
}

int run_presets() {
  for (const auto& p : kEnvPresets) {
    std::cout << p.name << ": " << p.description << "\n";
    std::printf("  pixels_per_scene=%.6g target_fps=%.6g render_rate_bps=%.6g mtp_limit_ms=%.6g haptic_limit_ms=%.6g\n",
                p.qos.pixels_per_scene, p.qos.target_fps, p.qos.render_rate_bps, p.qos.mtp_limit_ms,
                p.qos.haptic_limit_ms);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metamec: user/task-centered actor-critic for Metaverse edge computing"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train one agent and write metrics CSV + params");
  std::string train_config;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::string> train_out;
  train_cmd->add_option("--config", train_config, "experiment config (JSON)")->required();
  train_cmd->add_option("--seed", train_seed, "override the config seed");
  train_cmd->add_option("--out", train_out, "override the output directory");

  auto* eval_cmd = app.add_subcommand("eval", "greedy evaluation of saved params");
  std::string eval_params, eval_config;
  std::optional<std::uint64_t> eval_seed;
  std::optional<std::size_t> eval_episodes;
  eval_cmd->add_option("--params", eval_params, "params JSON written by train")->required();
  eval_cmd->add_option("--config", eval_config, "experiment config (JSON)")->required();
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed (default: config seed)");
  eval_cmd->add_option("--episodes", eval_episodes, "episodes (default: training.eval_episodes)");

  auto* cmp_cmd = app.add_subcommand("compare", "train several configs over shared seeds");
  std::vector<std::string> cmp_configs;
  std::string cmp_seeds, cmp_out;
  cmp_cmd->add_option("--configs", cmp_configs, "experiment configs (JSON)")->required();
  cmp_cmd->add_option("--seeds", cmp_seeds, "comma-separated seed list")->required();
  cmp_cmd->add_option("--out", cmp_out, "output directory")->required();

  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of every architecture");
  auto* presets_cmd = app.add_subcommand("presets", "list environment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return run_train(train_config, train_seed, train_out);
    if (*eval_cmd) return run_eval(eval_params, eval_config, eval_seed, eval_episodes);
    if (*cmp_cmd) return run_compare(cmp_configs, cmp_seeds, cmp_out);
    if (*gc_cmd) return run_gradcheck();
    if (*presets_cmd) return run_presets();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
