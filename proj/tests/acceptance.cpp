// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 1 5 6      run a subset

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "metamec/metamec.hpp"
#include "support/degeneracy.hpp"
#include "support/oracle.hpp"

using namespace metamec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig repo_config(const std::string& name) {
  return load_config((fs::path(METAMEC_SOURCE_DIR) / "configs" / (name + ".json")).string());
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

/// final_window[algorithm][seed] for one metric.
std::map<std::string, std::map<std::uint64_t, double>> final_windows(const Comparison& cmp, const std::string& metric) {
  std::map<std::string, std::map<std::uint64_t, double>> out;
  for (const auto& r : cmp.runs) out[r.algorithm][r.seed] = r.final_window.at(metric);
  return out;
}

Outcome gradients() {
  const auto t0 = Clock::now();
  const auto report = gradcheck_all();
  const double t = seconds_since(t0);
  return {report.max_rel_error <= 1e-4 && t < 30.0,
          "max_rel_error=" + fmt("%.3e", report.max_rel_error) + " over " + std::to_string(report.entries.size()) +
              " checks, " + fmt("%.1f", t) + " s"};
}

Outcome degeneracy() {
  const auto t0 = Clock::now();
  bool all = true;
  std::string failed;
  for (const auto& c : metamec::testing::degeneracy_cases(7)) {
    if (!metamec::testing::trajectories_identical(c, 10)) {
      all = false;
      failed += " [" + c.name + "]";
    }
  }
  const double t = seconds_since(t0);
  return {all && t < 60.0, (all ? "4 equivalences bit-identical over 10 updates" : "mismatch:" + failed) + ", " +
                               fmt("%.1f", t) + " s"};
}

Outcome vr_ordering() {
  const auto t0 = Clock::now();
  const auto cmp = compare({repo_config("vr_user_centered"), repo_config("vr_traditional"), repo_config("vr_random")},
                           kSeeds);
  auto fw = final_windows(cmp, "success_rate");
  int wins = 0;
  double uc = 0.0, rnd = 0.0;
  std::ostringstream per_seed;
  for (auto s : kSeeds) {
    const double a = fw["user_centered"][s], b = fw["traditional"][s], c = fw["random"][s];
    wins += (a > b && b > c) ? 1 : 0;
    uc += a / kSeeds.size();
    rnd += c / kSeeds.size();
    per_seed << " s" << s << "=" << fmt("%.1f", a) << "/" << fmt("%.1f", b) << "/" << fmt("%.1f", c);
  }
  const double t = seconds_since(t0);
  return {wins >= 4 && uc - rnd >= 10.0,
          std::to_string(wins) + "/5 seeds ordered (uc/trad/random:" + per_seed.str() + "), uc-random=" +
              fmt("%.1f", uc - rnd) + " pp, " + fmt("%.0f", t) + " s"};
}

Outcome vehicle_ordering() {
  const auto t0 = Clock::now();
  const auto cmp = compare(
      {repo_config("vehicle_task_centered"), repo_config("vehicle_traditional"), repo_config("vehicle_random")}, kSeeds);
  auto delay = final_windows(cmp, "mean_delay_ms");
  auto acc = final_windows(cmp, "mean_accuracy");
  int wins = 0;
  std::ostringstream per_seed;
  for (auto s : kSeeds) {
    const double d0 = delay["task_centered"][s], d1 = delay["traditional"][s], d2 = delay["random"][s];
    const double a0 = acc["task_centered"][s], a1 = acc["traditional"][s], a2 = acc["random"][s];
    wins += (d0 <= d1 && d1 <= d2 && a0 >= a1 && a1 >= a2) ? 1 : 0;
    per_seed << " s" << s << "=" << fmt("%.1f", d0) << "/" << fmt("%.1f", d1) << "/" << fmt("%.1f", d2) << "ms,"
             << fmt("%.3f", a0) << "/" << fmt("%.3f", a1) << "/" << fmt("%.3f", a2);
  }
  const double t = seconds_since(t0);
  return {wins >= 4, std::to_string(wins) + "/5 seeds ordered (tc/trad/random:" + per_seed.str() + "), " +
                         fmt("%.0f", t) + " s"};
}

Outcome random_oracle() {
  const auto t0 = Clock::now();
  constexpr std::size_t kSteps = 100000;

  const auto vr_cfg = repo_config("vr_random");
  const auto& vr = vr_cfg.env.vr();
  const double vr_oracle = metamec::testing::vr_uniform_success_oracle(vr, kSteps, 99);
  const auto vr_eval =
      evaluate(make_agent(vr_cfg), vr_cfg.env, kSteps / vr.episode_length, 4242).at("success_rate").mean;
  const bool vr_ok = std::abs(vr_eval - vr_oracle) <= 1.0;

  const auto veh_cfg = repo_config("vehicle_random");
  const auto& veh = veh_cfg.env.vehicle();
  const auto veh_oracle = metamec::testing::vehicle_uniform_oracle(veh, kSteps, 99);
  const auto veh_eval = evaluate(make_agent(veh_cfg), veh_cfg.env, kSteps / veh.episode_length, 4242);
  const double d = veh_eval.at("mean_delay_ms").mean, a = veh_eval.at("mean_accuracy").mean;
  const double d_rel = std::abs(d - veh_oracle.mean_delay_ms) / veh_oracle.mean_delay_ms;
  const double a_rel = std::abs(a - veh_oracle.mean_accuracy) / veh_oracle.mean_accuracy;
  const double t = seconds_since(t0);
  return {vr_ok && d_rel <= 0.02 && a_rel <= 0.02 && t < 60.0,
          "vr " + fmt("%.2f", vr_eval) + "% vs oracle " + fmt("%.2f", vr_oracle) + "%; delay " + fmt("%.3f", d) +
              " vs " + fmt("%.3f", veh_oracle.mean_delay_ms) + " ms (" + fmt("%.2f", 100 * d_rel) + "%); accuracy " +
              fmt("%.4f", a) + " vs " + fmt("%.4f", veh_oracle.mean_accuracy) + " (" + fmt("%.2f", 100 * a_rel) +
              "%), " + fmt("%.1f", t) + " s"};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "metamec_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool all = true;
  std::size_t rows = 0;
  for (const char* name : {"vr_user_centered", "vehicle_task_centered", "vehicle_uut"}) {
    auto cfg = repo_config(name);
    cfg.training.episodes = 100;
    cfg.training.eval_every = 10;
    const auto a = dir / (std::string(name) + "_a.csv"), b = dir / (std::string(name) + "_b.csv");
    const auto ra = train(cfg);
    write_metrics(ra.rows, a.string());
    write_metrics(train(cfg).rows, b.string());
    rows += ra.rows.size();
    all = all && file_bytes(a) == file_bytes(b) && !ra.rows.empty();
  }
  return {all, std::to_string(rows) + " rows over 3 configs, " + (all ? "byte-identical" : "files differ")};
}

int run_gtest(const char* binary, const char* filter) {
  const std::string cmd = std::string(binary) + " --gtest_brief=1 --gtest_filter='" + filter + "' > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome invariants() {
  struct Suite {
    const char* binary;
    const char* filter;
    const char* label;
  };
  const Suite suites[] = {
      {METAMEC_TEST_ENV_VR, "VrInvariants.*", "vr monotonicity and channel crowding"},
      {METAMEC_TEST_ENVCORE, "ShareChannel.*:ShannonRate.MonotoneOnGrids", "rate monotonicity"},
      {METAMEC_TEST_ENV_VEHICLE, "LevelTable.*:VehicleInvariants.*", "level table and balanced assignment"},
  };
  bool all = true;
  std::string detail;
  for (const auto& s : suites) {
    const bool ok = run_gtest(s.binary, s.filter) == 0;
    all = all && ok;
    detail += std::string(detail.empty() ? "" : "; ") + s.label + (ok ? " ok" : " FAILED");
  }
  return {all, detail};
}

Outcome qos() {
  const auto& q = find_preset("metaverse-spec").qos;
  const bool ok = q.pixels_per_scene == 64e6 && q.target_fps == 120.0 && q.render_rate_bps == 1e9 &&
                  q.mtp_limit_ms == 20.0 && q.haptic_limit_ms == 1.0;
  return {ok, "pixels=" + fmt("%.6g", q.pixels_per_scene) + " fps=" + fmt("%.6g", q.target_fps) +
                  " bps=" + fmt("%.6g", q.render_rate_bps) + " mtp=" + fmt("%.6g", q.mtp_limit_ms) +
                  "ms haptic=" + fmt("%.6g", q.haptic_limit_ms) + "ms"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"degeneracy equivalences", degeneracy},
      {"vr ordering user_centered > traditional > random", vr_ordering},
      {"vehicle ordering task_centered <= traditional <= random", vehicle_ordering},
      {"random policy vs Monte-Carlo oracle", random_oracle},
      {"determinism", determinism},
      {"environment invariants", invariants},
      {"QoS preset fidelity", qos},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
