#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fedmon/adversary.hpp"
#include "fedmon/aggregation.hpp"
#include "fedmon/dataset.hpp"
#include "fedmon/defense.hpp"
#include "fedmon/model.hpp"

namespace fedmon {

enum class DatasetKind { blobs, mnist };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::blobs;
  std::string path;  // directory holding the four MNIST IDX files
  std::uint64_t seed = 7;
  std::size_t classes = 10;
  std::size_t dim = 20;
  double spread = 0.05;
  std::size_t train = 2000;
  std::size_t validation = 500;
  std::size_t test = 500;
};

/// Everything needed to reproduce one run.
struct ExperimentConfig {
  std::string name = "blobs";
  DatasetSpec dataset;
  // Empty means [input dim, 30, class count].
  std::vector<std::size_t> layers;
  TrainSpec train;
  std::size_t workers = 10;
  DistributionMode distribution = DistributionMode::full_copy;
  std::size_t per_round = 0;  // workers sampled per round; 0 = all
  AttackPattern attack = {AttackKind::none, {0, 1, 2, 3}, 10, 0.5};
  FabricationParams fabrication;
  AggregationRule aggregation;
  bool defense_enabled = false;
  MonitorConfig monitor;
  std::size_t rounds = 80;
  std::uint64_t seed = 42;
  std::size_t readout_round = 58;
  double target_accuracy = 0.0;  // early stop; 0 disables
  double beta = 2.0;
  std::string out = "run.csv";

  /// Resolved architecture (fills in the default when `layers` is empty).
  MlpArchitecture architecture() const;

  /// Checks every cross-field constraint; throws ConfigError listing each
  /// offending key.
  void validate() const;
};

/// Ordered `key = value` pairs; parse_config() reads them back unchanged.
std::vector<std::pair<std::string, std::string>> to_entries(const ExperimentConfig& config);

/// Applies one `key = value` setting. Throws ConfigError naming the key.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses the line-oriented config text (`#` starts a comment). Later
/// `overrides` (each "key=value") win over the text. The result is validated.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {});

std::string format_double(double v);

}  // namespace fedmon
