#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fedmon/model.hpp"

namespace fedmon {

struct MonitorConfig {
  std::size_t delta = 10;  // rounds of observation before any verdict
  std::size_t window = 5;
  double tolerance = 0.0;
  std::size_t strikes_to_exclude = 3;

  void validate() const;  // throws PreconditionError
};

// Verdicts are withheld while round_t < delta.
constexpr bool is_active(std::size_t round_t, std::size_t delta) noexcept {
  return round_t >= delta;
}

struct ExclusionEvent {
  std::size_t worker = 0;
  std::size_t round = 0;
};

/// Chief-side behaviour attestation. Each round the chief scores every
/// submitted local model on its private validation set and compares the
/// error rate with that worker's previous one. Once the monitoring period is
/// over, workers whose error keeps failing to improve are excluded for good.
class AttestationState {
 public:
  explicit AttestationState(std::size_t worker_count);

  /// Evaluates `local_model` on `validation` and records the error.
  /// Returns E(t) - E(t-1), or 0 for the worker's first observation.
  double attest(std::size_t worker_id, const ParamVector& local_model,
                const MlpArchitecture& arch, const Dataset& validation, std::size_t round_t);

  /// Records an already computed error rate; same return value as attest().
  /// Split out so evaluations can run in parallel before this barrier step.
  double record(std::size_t worker_id, double error_rate, std::size_t round_t);

  /// Applies the strike rule to this round's attestations and returns the
  /// workers excluded now. No-op before the monitoring period ends.
  std::set<std::size_t> update_verdicts(const MonitorConfig& config, std::size_t round_t);

  bool is_excluded(std::size_t worker_id) const { return excluded_.contains(worker_id); }
  const std::set<std::size_t>& excluded() const noexcept { return excluded_; }
  const std::map<std::size_t, std::size_t>& excluded_at() const noexcept { return excluded_at_; }
  const std::vector<ExclusionEvent>& events() const noexcept { return events_; }
  const std::vector<double>& history(std::size_t worker_id) const;
  std::size_t strikes(std::size_t worker_id) const;
  std::size_t worker_count() const noexcept { return history_.size(); }

 private:
  void check_worker(std::size_t worker_id) const;

  std::vector<std::vector<double>> history_;
  // Strike flags of the most recent post-activation rounds, newest last.
  std::vector<std::deque<bool>> recent_;
  std::vector<std::optional<double>> pending_;  // this round's error delta
  std::set<std::size_t> excluded_;
  std::map<std::size_t, std::size_t> excluded_at_;
  std::vector<ExclusionEvent> events_;
};

}  // namespace fedmon
