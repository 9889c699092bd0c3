// fedmon: run, grid, search and report subcommands.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fedmon/config.hpp"
#include "fedmon/errors.hpp"
#include "fedmon/experiment.hpp"
#include "fedmon/grid.hpp"
#include "fedmon/report.hpp"
#include "fedmon/search.hpp"

namespace fs = std::filesystem;
using namespace fedmon;

namespace {

ExperimentConfig load(const std::string& path, const std::vector<std::string>& sets) {
  return path.empty() ? parse_config_text("", sets) : parse_config(path, sets);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning poisoning simulator with a monitored attestation defense"};
  app.require_subcommand(1);

  std::vector<std::string> sets;
  std::size_t threads = 1;
  std::size_t jobs = 1;

  // run
  auto* run = app.add_subcommand("run", "Run one experiment and write its CSV");
  std::string run_config;
  run->add_option("-c,--config", run_config, "Config file (key = value lines)");
  run->add_option("-s,--set", sets, "Override, key=value (repeatable)");
  run->add_option("-t,--threads", threads, "Threads inside the run")->check(CLI::PositiveNumber);

  // grid
  auto* grid = app.add_subcommand("grid", "Run the one-at-a-time attack/defense grid");
  std::vector<std::string> grid_configs;
  std::vector<std::size_t> deltas = kDefaultDeltaSet;
  std::string grid_dir = "grid";
  bool manifest_only = false;
  grid->add_option("-c,--config", grid_configs, "Use-case config (repeatable)");
  grid->add_option("-s,--set", sets, "Override applied to every use case");
  grid->add_option("-d,--deltas", deltas, "Monitoring periods")->delimiter(',');
  grid->add_option("-o,--out-dir", grid_dir, "Directory for run CSVs");
  grid->add_option("-j,--jobs", jobs, "Runs in flight")->check(CLI::PositiveNumber);
  grid->add_option("-t,--threads", threads, "Threads inside each run")->check(CLI::PositiveNumber);
  grid->add_flag("--manifest-only", manifest_only, "Print the manifest and stop");

  // search
  auto* search = app.add_subcommand("search", "Pick delta by mean post-activation F2");
  std::string search_config;
  std::vector<std::size_t> candidates = kDefaultDeltaSet;
  std::size_t n_seeds = 5;
  std::string search_dir;
  std::vector<std::string> score_files;
  search->add_option("-c,--config", search_config, "Config file");
  search->add_option("-s,--set", sets, "Override, key=value (repeatable)");
  search->add_option("--candidates", candidates, "Candidate deltas")->delimiter(',');
  search->add_option("-n,--seeds", n_seeds, "Seeds per candidate")->check(CLI::PositiveNumber);
  search->add_option("-j,--jobs", jobs, "Runs in flight")->check(CLI::PositiveNumber);
  search->add_option("-o,--out-dir", search_dir, "Keep the run CSVs here");
  search->add_option("--score", score_files, "Score saved defended CSVs instead of running");

  // report
  auto* report = app.add_subcommand("report", "Compare run CSVs");
  std::vector<std::string> report_files;
  std::string chart_dir;
  report->add_option("files", report_files, "Run CSVs; differences are against the first")
      ->required();
  report->add_option("--charts", chart_dir, "Write accuracy.svg and f2.svg here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load(run_config, sets);
      RunOptions opts;
      opts.threads = threads;
      const auto result = run_experiment(cfg, opts);
      std::cout << cfg.out << ": " << summary_line(result.summary) << "\n";
    } else if (*grid) {
      std::vector<ExperimentConfig> cases;
      if (grid_configs.empty()) cases.push_back(load("", sets));
      for (const auto& p : grid_configs) cases.push_back(load(p, sets));
      const auto manifest = oat_grid(cases, deltas, grid_dir);
      std::cout << manifest_text(manifest);
      std::cout << manifest.size() << " runs\n";
      if (manifest_only) return 0;
      write_file(fs::path(grid_dir) / "manifest.tsv", manifest_text(manifest));
      int failed = 0;
      for (const auto& r : run_grid(manifest, jobs, threads)) {
        if (r.summary) {
          std::cout << r.run_id << ": " << summary_line(*r.summary) << "\n";
        } else {
          std::cerr << "failed " << r.error << "\n";
          ++failed;
        }
      }
      if (failed) {
        std::cerr << failed << " of " << manifest.size() << " runs failed\n";
        return 1;
      }
    } else if (*search) {
      DeltaRecommendation rec;
      if (!score_files.empty()) {
        std::vector<RunCsv> runs;
        for (const auto& f : score_files) runs.push_back(load_run_csv(f));
        rec = recommend(score_table(runs));
      } else {
        rec = delta_search(load(search_config, sets), candidates, n_seeds, jobs, search_dir);
      }
      std::cout << render_recommendation(rec);
    } else if (*report) {
      std::vector<fs::path> paths(report_files.begin(), report_files.end());
      const auto runs = load_report_runs(paths);
      const auto rep = build_report(runs);
      std::cout << render_report(rep);
      if (!chart_dir.empty()) {
        write_file(fs::path(chart_dir) / "accuracy.svg", accuracy_svg(rep));
        write_file(fs::path(chart_dir) / "f2.svg", f2_svg(runs));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
