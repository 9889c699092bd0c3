#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fedmon/adversary.hpp"
#include "fedmon/aggregation.hpp"
#include "fedmon/config.hpp"
#include "fedmon/dataset.hpp"
#include "fedmon/defense.hpp"
#include "fedmon/metrics.hpp"
#include "fedmon/model.hpp"

namespace fedmon {

struct WorkerNode {
  std::size_t id = 0;
  SharedDataset data;
  double alpha = 0.0;  // l_i / l
};

struct ChiefNode {
  ParamVector global;
  SharedDataset validation;
  SharedDataset test;
  AttestationState attestation{0};
  AggregationRule rule;
};

// Called once per round with the ids whose deltas reach the aggregator.
using AggregateHook = std::function<void(std::size_t round, std::span<const std::size_t> ids)>;

struct ProtocolSettings {
  MlpArchitecture arch;
  TrainSpec train;
  FabricationParams fabrication;
  bool defense_enabled = false;
  MonitorConfig monitor;
  std::size_t per_round = 0;  // 0 = every non-excluded worker
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  AggregateHook on_aggregate;
};

struct RoundOutcome {
  std::size_t round = 0;
  double global_accuracy = 0.0;
  std::vector<std::optional<Role>> submitted;  // per worker; empty if it sat out
  std::set<std::size_t> newly_excluded;
  std::set<std::size_t> excluded_so_far;
  std::map<std::size_t, double> error_delta;
};

/// One worker's message for this round: w_i - w_G after local SGD when
/// benign, a fabricated Gaussian vector when malicious.
ParamVector worker_step(const WorkerNode& worker, const ParamVector& global, Role role,
                        const MlpArchitecture& arch, const TrainSpec& train,
                        const FabricationParams& fabrication, std::uint64_t seed,
                        std::size_t round_t);

/// Roles, local updates, attestation and verdicts, aggregation over the
/// survivors (alphas renormalised), global update, test accuracy.
/// Throws NoParticipantsError when no worker is left to aggregate.
RoundOutcome run_round(ChiefNode& chief, std::span<const WorkerNode> workers,
                       const AttackPattern& attack, const ProtocolSettings& settings,
                       std::size_t round_t);

struct Corpus {
  SharedDataset train;
  SharedDataset validation;  // chief only
  SharedDataset test;
};

Corpus build_corpus(const ExperimentConfig& config);

enum class RunStatus { completed, target_reached, no_participants };

std::string_view to_string(RunStatus status);

struct RoundRecord {
  std::size_t round = 0;
  double global_accuracy = 0.0;
  std::size_t n_excluded_total = 0;
  std::set<std::size_t> newly_excluded;
  DetectionRecord detection;
};

struct ExperimentLog {
  double initial_accuracy = 0.0;
  RunStatus status = RunStatus::completed;
  std::set<std::size_t> truth;
  std::vector<RoundRecord> rounds;
  std::vector<ExclusionEvent> events;
  std::vector<std::vector<std::optional<Role>>> roles;  // per round, per worker
};

struct RunOptions {
  std::size_t threads = 1;
  AggregateHook on_aggregate;
};

/// Runs rounds 0..T-1 (or until the target accuracy is reached).
ExperimentLog run_training(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace fedmon
