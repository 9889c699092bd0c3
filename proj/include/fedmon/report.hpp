#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedmon/experiment.hpp"

namespace fedmon {

struct ReportRun {
  std::string label;
  RunCsv csv;
};

// Readout summary for one run: which attack, which defense setting.
struct ReportCell {
  std::string label;
  std::string attack;
  std::string defense;  // "off" or "d<delta>"
  std::optional<double> readout_accuracy;
  double final_accuracy = 0.0;
  double mean_f2 = 0.0;
};

struct Report {
  std::vector<std::string> labels;
  std::size_t round_count = 0;  // longest run
  // accuracy[run][round]; empty past the end of a shorter run.
  std::vector<std::vector<std::optional<double>>> accuracy;
  // difference[k][round] = accuracy of run k+1 minus accuracy of run 0.
  std::vector<std::vector<std::optional<double>>> difference;
  std::vector<ReportCell> cells;
};

/// Throws Error when the runs do not share one config schema.
Report build_report(const std::vector<ReportRun>& runs);

// Labels are the file stems.
std::vector<ReportRun> load_report_runs(const std::vector<std::filesystem::path>& paths);

/// Aligned per-round table followed by the readout summary.
std::string render_report(const Report& report);

// Standalone SVG line charts against round.
std::string accuracy_svg(const Report& report);
std::string f2_svg(const std::vector<ReportRun>& runs);

}  // namespace fedmon
