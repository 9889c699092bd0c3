#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string_view>

#include "fedmon/model.hpp"

namespace fedmon {

enum class Role { benign, malicious };

enum class AttackKind { none, static_set, pretence, randomized };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);  // throws PreconditionError

struct AttackPattern {
  AttackKind kind = AttackKind::none;
  std::set<std::size_t> compromised;
  std::size_t start_round = 10;  // pretence only
  double flip_prob = 0.5;        // randomized only

  static AttackPattern none() { return {}; }
  static AttackPattern static_set(std::set<std::size_t> ids) {
    return {AttackKind::static_set, std::move(ids), 10, 0.5};
  }
  static AttackPattern pretence(std::set<std::size_t> ids, std::size_t start) {
    return {AttackKind::pretence, std::move(ids), start, 0.5};
  }
  static AttackPattern randomized(std::set<std::size_t> ids, double p) {
    return {AttackKind::randomized, std::move(ids), 10, p};
  }

  // Ground-truth adversary membership (empty when kind == none).
  std::set<std::size_t> truth() const;

  // Throws PreconditionError if an id is >= worker_count or flip_prob is outside [0, 1].
  void validate(std::size_t worker_count) const;
};

struct FabricationParams {
  double mu = 0.5;
  double sigma = 2e6;
};

/// Role of `worker_id` at `round_t`. Randomized draws come from the
/// (seed, worker, round) substream, so the answer does not depend on call order.
Role role_at(const AttackPattern& pattern, std::size_t worker_id, std::size_t round_t,
             std::uint64_t seed);

/// d i.i.d. samples of N(mu, sigma^2).
ParamVector fabricate_update(std::size_t d, const FabricationParams& params,
                             std::mt19937_64& gen);

}  // namespace fedmon
