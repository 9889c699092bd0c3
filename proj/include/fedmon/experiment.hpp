#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedmon/config.hpp"
#include "fedmon/protocol.hpp"

namespace fedmon {

// Column order of every run CSV.
inline constexpr const char* kCsvHeader =
    "round,global_accuracy,n_excluded_total,newly_excluded_ids,tp,fp,fn,tn,precision,recall,f2";

struct RunSummary {
  std::string status;
  std::size_t rounds_run = 0;
  std::size_t readout_round = 0;
  std::optional<double> readout_accuracy;  // empty when the run ended earlier
  double final_accuracy = 0.0;
  double mean_post_delta_f2 = 0.0;  // rounds >= delta, or all rounds without defense
};

/// A run CSV read back from disk.
struct RunCsv {
  std::vector<std::pair<std::string, std::string>> config;
  double initial_accuracy = 0.0;
  std::string status;
  std::vector<RoundRecord> rows;

  // Value of a resolved config key; throws Error if missing.
  const std::string& get(const std::string& key) const;
};

/// Per-run CSV: `#`-prefixed header with the resolved config, the column
/// header, one row per round, then a `# summary` line.
std::string render_csv(const ExperimentConfig& config, const ExperimentLog& log);

RunSummary summarize(const ExperimentConfig& config, const ExperimentLog& log);
// Same numbers, recomputed from a parsed CSV.
RunSummary summarize(const RunCsv& csv);

RunCsv parse_run_csv(const std::string& text);  // throws Error on schema mismatch
RunCsv load_run_csv(const std::filesystem::path& path);

struct RunResult {
  ExperimentLog log;
  RunSummary summary;
  std::string csv;
};

/// Runs the experiment and, when `write` is set, stores the CSV at config.out.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {},
                         bool write = true);

std::string summary_line(const RunSummary& s);

}  // namespace fedmon
