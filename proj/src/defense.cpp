#include "fedmon/defense.hpp"

#include <algorithm>
#include <string>

#include "fedmon/errors.hpp"

namespace fedmon {

void MonitorConfig::validate() const {
  if (window == 0) throw PreconditionError("monitor: window must be at least 1");
  if (strikes_to_exclude == 0)
    throw PreconditionError("monitor: strikes_to_exclude must be at least 1");
  if (strikes_to_exclude > window)
    throw PreconditionError("monitor: strikes_to_exclude cannot exceed the window");
}

AttestationState::AttestationState(std::size_t worker_count)
    : history_(worker_count), recent_(worker_count), pending_(worker_count) {}

void AttestationState::check_worker(std::size_t worker_id) const {
  if (worker_id >= history_.size())
    throw PreconditionError("attestation: unknown worker " + std::to_string(worker_id));
}

double AttestationState::attest(std::size_t worker_id, const ParamVector& local_model,
                                const MlpArchitecture& arch, const Dataset& validation,
                                std::size_t round_t) {
  check_worker(worker_id);
  if (excluded_.contains(worker_id))
    throw PreconditionError("attestation: worker " + std::to_string(worker_id) +
                            " is excluded");
  if (validation.empty()) throw PreconditionError("attestation: empty validation set");
  return record(worker_id, evaluate(arch, local_model, validation).error_rate, round_t);
}

double AttestationState::record(std::size_t worker_id, double error_rate, std::size_t) {
  check_worker(worker_id);
  if (excluded_.contains(worker_id))
    throw PreconditionError("attestation: worker " + std::to_string(worker_id) +
                            " is excluded");
  auto& h = history_[worker_id];
  const double delta = h.empty() ? 0.0 : error_rate - h.back();
  h.push_back(error_rate);
  pending_[worker_id] = delta;
  return delta;
}

std::set<std::size_t> AttestationState::update_verdicts(const MonitorConfig& config,
                                                        std::size_t round_t) {
  config.validate();
  std::set<std::size_t> newly;
  if (!is_active(round_t, config.delta)) {
    std::fill(pending_.begin(), pending_.end(), std::nullopt);
    return newly;
  }
  for (std::size_t w = 0; w < pending_.size(); ++w) {
    if (!pending_[w]) continue;
    const double delta = *pending_[w];
    pending_[w].reset();
    auto& recent = recent_[w];
    if (delta > config.tolerance) {
      recent.push_back(true);
      while (recent.size() > config.window) recent.pop_front();
    } else {
      recent.clear();
    }
    if (strikes(w) >= config.strikes_to_exclude) {
      excluded_.insert(w);
      excluded_at_[w] = round_t;
      events_.push_back({w, round_t});
      newly.insert(w);
    }
  }
  return newly;
}

const std::vector<double>& AttestationState::history(std::size_t worker_id) const {
  check_worker(worker_id);
  return history_[worker_id];
}

std::size_t AttestationState::strikes(std::size_t worker_id) const {
  check_worker(worker_id);
  const auto& r = recent_[worker_id];
  return static_cast<std::size_t>(std::count(r.begin(), r.end(), true));
}

}  // namespace fedmon
