#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedmon/config.hpp"
#include "fedmon/experiment.hpp"

namespace fedmon {

inline const std::vector<std::size_t> kDefaultDeltaSet = {0, 10, 40};

struct GridEntry {
  std::string run_id;
  ExperimentConfig config;  // config.out already points into the grid directory
};

using GridManifest = std::vector<GridEntry>;

/// One-at-a-time manifest. Per use case: the no-attack baseline, each of
/// static / pretence / randomized without defense, and each attack again
/// for every delta in `delta_set` with the defense on. Run ids look like
/// `blobs-s42-static-d10` and must be unique across use cases.
GridManifest oat_grid(const std::vector<ExperimentConfig>& use_cases,
                      const std::vector<std::size_t>& delta_set,
                      const std::filesystem::path& out_dir);

std::string manifest_text(const GridManifest& manifest);

struct GridRunResult {
  std::string run_id;
  std::filesystem::path csv;
  std::optional<RunSummary> summary;  // empty when the run failed
  std::string error;
};

/// Executes every entry, `jobs` at a time. A failed run is recorded and the
/// rest carry on.
std::vector<GridRunResult> run_grid(const GridManifest& manifest, std::size_t jobs,
                                    std::size_t threads_per_run = 1);

}  // namespace fedmon
