#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedmon/config.hpp"
#include "fedmon/experiment.hpp"

namespace fedmon {

struct DeltaScore {
  std::size_t delta = 0;
  double mean_f2 = 0.0;              // mean over seeds of the post-activation F2
  double mean_final_accuracy = 0.0;
  std::vector<std::uint64_t> seeds;
};

/// Empirical monitoring-period choice: delta_t plus the table it came from.
struct DeltaRecommendation {
  std::size_t delta_t = 0;
  std::vector<DeltaScore> table;
  std::vector<std::uint64_t> seeds;
};

/// Argmax of mean F2; ties go to higher mean final accuracy, then smaller delta.
/// Throws PreconditionError on an empty table.
DeltaRecommendation recommend(std::vector<DeltaScore> table);

/// Groups saved runs by their `defense.delta` header value and scores each
/// group. Runs without the defense are rejected.
std::vector<DeltaScore> score_table(const std::vector<RunCsv>& runs);

/// Runs every candidate over seeds base.seed, base.seed+1, ... and scores the
/// CSVs as written. When `out_dir` is non-empty each CSV is kept there.
DeltaRecommendation delta_search(const ExperimentConfig& base,
                                 const std::vector<std::size_t>& candidates, std::size_t n_seeds,
                                 std::size_t jobs = 1, const std::filesystem::path& out_dir = {});

std::string render_recommendation(const DeltaRecommendation& rec);

}  // namespace fedmon
