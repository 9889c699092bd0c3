#include "fedmon/adversary.hpp"

#include <string>

#include "fedmon/errors.hpp"
#include "fedmon/rng.hpp"

namespace fedmon {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::static_set: return "static";
    case AttackKind::pretence: return "pretence";
    case AttackKind::randomized: return "randomized";
  }
  return "none";
}

AttackKind attack_kind_from_string(std::string_view name) {
  if (name == "none") return AttackKind::none;
  if (name == "static") return AttackKind::static_set;
  if (name == "pretence") return AttackKind::pretence;
  if (name == "randomized") return AttackKind::randomized;
  throw PreconditionError("unknown attack pattern '" + std::string(name) + "'");
}

std::set<std::size_t> AttackPattern::truth() const {
  return kind == AttackKind::none ? std::set<std::size_t>{} : compromised;
}

void AttackPattern::validate(std::size_t worker_count) const {
  for (auto id : compromised)
    if (id >= worker_count)
      throw PreconditionError("compromised worker id " + std::to_string(id) +
                              " is not a valid worker");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
    throw PreconditionError("flip probability must lie in [0, 1]");
}

Role role_at(const AttackPattern& pattern, std::size_t worker_id, std::size_t round_t,
             std::uint64_t seed) {
  if (pattern.kind == AttackKind::none || !pattern.compromised.contains(worker_id))
    return Role::benign;
  switch (pattern.kind) {
    case AttackKind::static_set:
      return Role::malicious;
    case AttackKind::pretence:
      return round_t >= pattern.start_round ? Role::malicious : Role::benign;
    case AttackKind::randomized: {
      auto gen = rng::stream(seed, rng::Purpose::role, worker_id, round_t);
      std::bernoulli_distribution flip(pattern.flip_prob);
      return flip(gen) ? Role::malicious : Role::benign;
    }
    case AttackKind::none:
      break;
  }
  return Role::benign;
}

ParamVector fabricate_update(std::size_t d, const FabricationParams& params,
                             std::mt19937_64& gen) {
  if (d == 0) throw PreconditionError("fabricate_update: d must be at least 1");
  if (!(params.sigma > 0.0)) throw PreconditionError("fabricate_update: sigma must be positive");
  std::normal_distribution<double> dist(params.mu, params.sigma);
  ParamVector out(d);
  for (auto& v : out) v = dist(gen);
  return out;
}

}  // namespace fedmon
