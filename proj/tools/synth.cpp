// synth: STL trajectory synthesis front end.
//
// Subcommands:
//   run    one pipeline on one seed, writing trajectory/result/iteration files
//   sweep  grid of (horizon, pipeline, seed) cells with per-cell and median CSVs
//   check  standalone robustness monitor for a formula against a trace CSV
//
// Verbosity is controlled by the SYNTH_LOG environment variable
// (quiet|info|debug, default info).

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stlsynth/problem.hpp"

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("SYNTH_LOG");
  if (env == nullptr) return LogLevel::Info;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::Info) {
    std::cerr << "[synth] " << message << "\n";
  }
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::Debug) {
    std::cerr << "[synth] " << message << "\n";
  }
}

// Accepts "3", "1,4,9" and "0..9" (inclusive range).
std::vector<std::uint64_t> parse_id_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) {
      const std::size_t dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const std::uint64_t lo = std::stoull(item.substr(0, dots));
        const std::uint64_t hi = std::stoull(item.substr(dots + 2));
        if (hi < lo) {
          throw CLI::ValidationError("range '" + item + "' is descending");
        }
        for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) {
    throw CLI::ValidationError("expected a non-empty list like 0..9 or 1,2,5");
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& pipeline_name,
            std::uint64_t seed, const std::string& out_dir) {
  const auto problem = stlsynth::load_problem(config_path);
  const auto pipeline = stlsynth::pipeline_from_string(pipeline_name);
  log_info("running " + pipeline_name + " with seed " + std::to_string(seed));
  const auto record = stlsynth::run_pipeline(problem, pipeline, seed);
  stlsynth::write_run_outputs(problem, record, out_dir);
  std::printf("status=%s rho=%.6g J=%.6g evaluations=%d wall_ms=%.1f out=%s\n",
              stlsynth::to_string(record.result.status), record.result.best_rho,
              record.result.best_cost, record.result.evaluations, record.wall_ms,
              out_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& horizons,
              const std::string& seeds, const std::string& pipelines,
              const std::string& out_dir) {
  const auto problem = stlsynth::load_problem(config_path);

  std::vector<int> horizon_list;
  for (std::uint64_t h : parse_id_list(horizons)) {
    horizon_list.push_back(static_cast<int>(h));
  }
  const auto seed_list = parse_id_list(seeds);

  std::vector<stlsynth::Pipeline> pipeline_list;
  std::size_t start = 0;
  while (start <= pipelines.size()) {
    const std::size_t comma = pipelines.find(',', start);
    const std::string name =
        pipelines.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!name.empty()) {
      pipeline_list.push_back(stlsynth::pipeline_from_string(name));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }

  log_info("sweeping " + std::to_string(horizon_list.size()) + " horizons x " +
           std::to_string(pipeline_list.size()) + " pipelines x " +
           std::to_string(seed_list.size()) + " seeds");
  const auto cells =
      stlsynth::run_sweep(problem, horizon_list, pipeline_list, seed_list);
  for (const auto& cell : cells) {
    log_debug("T=" + std::to_string(cell.horizon) + " " +
              std::string(stlsynth::to_string(cell.pipeline)) + " seed=" +
              std::to_string(cell.seed) + " -> " + cell.status);
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream runs(std::filesystem::path(out_dir) / "sweep_runs.csv");
    stlsynth::write_sweep_csv(runs, cells);
  }
  {
    std::ofstream summary(std::filesystem::path(out_dir) / "sweep_summary.csv");
    stlsynth::write_sweep_summary_csv(summary, cells);
  }
  int failures = 0;
  for (const auto& cell : cells) {
    if (!cell.ok) ++failures;
  }
  std::printf("cells=%zu failures=%d out=%s\n", cells.size(), failures,
              out_dir.c_str());
  return 0;
}

int cmd_check(const std::string& formula_text, const std::string& trace_path,
              int at_time) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open trace file " << trace_path << "\n";
    return 2;
  }
  const stlsynth::Trace trace = stlsynth::read_trace_csv(in);
  const stlsynth::Formula formula =
      stlsynth::parse_formula(formula_text, trace.dimension());
  const double rho = stlsynth::robustness(formula, trace, at_time);
  const bool satisfied = stlsynth::eval_boolean(formula, trace, at_time);
  std::printf("robustness=%.17g satisfied=%s\n", rho,
              satisfied ? "true" : "false");
  return satisfied ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL trajectory synthesis via DE-seeded GP-UCB"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string pipeline_name = "de_bo";
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one synthesis pipeline");
  run->add_option("--config", config_path, "Problem config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--pipeline", pipeline_name, "de_only | bo_only | de_bo")
      ->required();
  run->add_option("--seed", seed, "RNG seed")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string horizons, seeds = "0..9", pipelines = "de_only,bo_only,de_bo";
  auto* sweep = app.add_subcommand("sweep", "Sweep horizons x pipelines x seeds");
  sweep->add_option("--config", config_path, "Problem config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--horizons", horizons, "e.g. 10,15,20")->required();
  sweep->add_option("--seeds", seeds, "e.g. 0..9 or 0,3,7")
      ->capture_default_str();
  sweep->add_option("--pipelines", pipelines, "comma list")
      ->capture_default_str();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  std::string formula_text, trace_path;
  int at_time = 0;
  auto* check = app.add_subcommand("check", "Robustness monitor for a trace CSV");
  check->add_option("--formula", formula_text, "STL formula text")->required();
  check->add_option("--trace", trace_path, "Trace CSV path")->required();
  check->add_option("--time", at_time, "Evaluation time index")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, pipeline_name, seed, out_dir);
    }
    if (sweep->parsed()) {
      return cmd_sweep(config_path, horizons, seeds, pipelines, out_dir);
    }
    if (check->parsed()) {
      return cmd_check(formula_text, trace_path, at_time);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
