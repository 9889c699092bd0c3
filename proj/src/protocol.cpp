#include "fedmon/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedmon/errors.hpp"
#include "fedmon/parallel.hpp"
#include "fedmon/rng.hpp"

namespace fedmon {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::target_reached: return "target_reached";
    case RunStatus::no_participants: return "no_participants";
  }
  return "completed";
}

ParamVector worker_step(const WorkerNode& worker, const ParamVector& global, Role role,
                        const MlpArchitecture& arch, const TrainSpec& train,
                        const FabricationParams& fabrication, std::uint64_t seed,
                        std::size_t round_t) {
  if (global.size() != arch.param_count())
    throw DimensionError("worker_step: global model does not match architecture");
  if (role == Role::malicious) {
    auto gen = rng::stream(seed, rng::Purpose::fabricate, worker.id, round_t);
    return fabricate_update(global.size(), fabrication, gen);
  }
  if (!worker.data) throw PreconditionError("worker_step: worker has no data");
  auto local = sgd_train(arch, global, *worker.data, train,
                         rng::derive_seed(seed, rng::Purpose::train, worker.id, round_t));
  for (std::size_t i = 0; i < local.size(); ++i) local[i] -= global[i];
  return local;
}

namespace {

std::vector<std::size_t> pick_participants(const ChiefNode& chief,
                                           std::span<const WorkerNode> workers,
                                           const ProtocolSettings& settings,
                                           std::size_t round_t) {
  std::vector<std::size_t> active;
  for (const auto& w : workers)
    if (!chief.attestation.is_excluded(w.id)) active.push_back(w.id);
  if (settings.per_round == 0 || settings.per_round >= active.size()) return active;

  auto gen = rng::stream(settings.seed, rng::Purpose::subset, round_t);
  std::shuffle(active.begin(), active.end(), gen);
  active.resize(settings.per_round);
  std::sort(active.begin(), active.end());
  return active;
}

// Reduces m when exclusions leave fewer survivors than the rule's Byzantine
// bound allows; below three survivors robust rules fall back to fedavg.
AggregationRule effective_rule(AggregationRule rule, std::size_t n) {
  if (rule.kind != AggregationKind::krum && rule.kind != AggregationKind::bulyan) return rule;
  if (n < 3) {
    rule.kind = AggregationKind::fedavg;
    return rule;
  }
  const std::size_t divisor = rule.kind == AggregationKind::krum ? 2 : 4;
  rule.m = std::min(rule.m, (n - 3) / divisor);
  return rule;
}

}  // namespace

RoundOutcome run_round(ChiefNode& chief, std::span<const WorkerNode> workers,
                       const AttackPattern& attack, const ProtocolSettings& settings,
                       std::size_t round_t) {
  const auto& arch = settings.arch;
  RoundOutcome outcome;
  outcome.round = round_t;
  outcome.submitted.assign(workers.size(), std::nullopt);

  const auto participants = pick_participants(chief, workers, settings, round_t);
  if (participants.empty()) throw NoParticipantsError("no participants remain");

  std::vector<Role> roles(participants.size());
  for (std::size_t i = 0; i < participants.size(); ++i) {
    roles[i] = role_at(attack, participants[i], round_t, settings.seed);
    outcome.submitted[participants[i]] = roles[i];
  }

  std::vector<ParamVector> deltas(participants.size());
  parallel_for(participants.size(), settings.threads, [&](std::size_t i) {
    deltas[i] = worker_step(workers[participants[i]], chief.global, roles[i], arch,
                            settings.train, settings.fabrication, settings.seed, round_t);
  });

  std::vector<bool> keep(participants.size(), true);
  if (settings.defense_enabled) {
    std::vector<double> errors(participants.size());
    parallel_for(participants.size(), settings.threads, [&](std::size_t i) {
      ParamVector local = chief.global;
      for (std::size_t j = 0; j < local.size(); ++j) local[j] += deltas[i][j];
      errors[i] = evaluate(arch, local, *chief.validation).error_rate;
    });
    for (std::size_t i = 0; i < participants.size(); ++i)
      outcome.error_delta[participants[i]] =
          chief.attestation.record(participants[i], errors[i], round_t);
    outcome.newly_excluded = chief.attestation.update_verdicts(settings.monitor, round_t);
    for (std::size_t i = 0; i < participants.size(); ++i)
      if (outcome.newly_excluded.contains(participants[i])) keep[i] = false;
  }

  std::vector<ParamVector> survivors;
  std::vector<std::size_t> survivor_ids;
  std::vector<double> alphas;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (!keep[i]) continue;
    survivors.push_back(std::move(deltas[i]));
    survivor_ids.push_back(participants[i]);
    alphas.push_back(workers[participants[i]].alpha);
  }
  if (survivors.empty()) throw NoParticipantsError("every participant was excluded");
  const double alpha_total = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  for (auto& a : alphas) a /= alpha_total;

  if (settings.on_aggregate) settings.on_aggregate(round_t, survivor_ids);
  const auto rule = effective_rule(chief.rule, survivors.size());
  const auto update = aggregate(rule, survivors, alphas);
  for (std::size_t j = 0; j < update.size(); ++j) chief.global[j] += update[j];

  if (settings.defense_enabled || chief.rule.kind != AggregationKind::fedavg) {
    for (double v : chief.global)
      if (!std::isfinite(v)) throw Error("global model became non-finite");
  }

  outcome.excluded_so_far = chief.attestation.excluded();
  outcome.global_accuracy = evaluate(arch, chief.global, *chief.test).accuracy;
  return outcome;
}

Corpus build_corpus(const ExperimentConfig& config) {
  const auto& ds = config.dataset;
  Corpus corpus;
  if (ds.kind == DatasetKind::blobs) {
    const std::size_t total = ds.train + ds.validation + ds.test;
    const std::size_t per_class = (total + ds.classes - 1) / ds.classes;
    auto all = gen_blobs(ds.classes, ds.dim, per_class, ds.spread, ds.seed);
    auto [rest, test] = split_count(all, ds.test, ds.seed + 1);
    auto [train, validation] = split_count(rest, ds.validation, ds.seed + 2);
    if (train.size() > ds.train) {
      std::vector<std::size_t> rows(ds.train);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      train = train.subset(rows);
    }
    corpus.train = std::make_shared<const Dataset>(std::move(train));
    corpus.validation = std::make_shared<const Dataset>(std::move(validation));
    corpus.test = std::make_shared<const Dataset>(std::move(test));
    return corpus;
  }

  const std::filesystem::path dir(ds.path);
  auto pool = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte",
                       ds.train + ds.validation);
  if (pool.size() < ds.train + ds.validation)
    throw Error("mnist: training files hold fewer examples than requested");
  auto [train, validation] = split_count(pool, ds.validation, ds.seed + 2);
  auto test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", ds.test);
  corpus.train = std::make_shared<const Dataset>(std::move(train));
  corpus.validation = std::make_shared<const Dataset>(std::move(validation));
  corpus.test = std::make_shared<const Dataset>(std::move(test));
  return corpus;
}

ExperimentLog run_training(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto arch = config.architecture();
  const auto corpus = build_corpus(config);

  std::vector<WorkerNode> workers;
  const auto shards = distribute(corpus.train, config.workers, config.distribution, config.seed);
  std::size_t total = 0;
  for (const auto& s : shards) total += s->size();
  for (std::size_t i = 0; i < shards.size(); ++i)
    workers.push_back({i, shards[i],
                       static_cast<double>(shards[i]->size()) / static_cast<double>(total)});

  ChiefNode chief;
  chief.global = init_params(arch, config.seed);
  chief.validation = corpus.validation;
  chief.test = corpus.test;
  chief.attestation = AttestationState(config.workers);
  chief.rule = config.aggregation;

  ProtocolSettings settings;
  settings.arch = arch;
  settings.train = config.train;
  settings.fabrication = config.fabrication;
  settings.defense_enabled = config.defense_enabled;
  settings.monitor = config.monitor;
  settings.per_round = config.per_round;
  settings.seed = config.seed;
  settings.threads = options.threads;
  settings.on_aggregate = options.on_aggregate;

  std::set<std::size_t> all_workers;
  for (std::size_t i = 0; i < config.workers; ++i) all_workers.insert(i);

  ExperimentLog log;
  log.truth = config.attack.truth();
  log.initial_accuracy = evaluate(arch, chief.global, *chief.test).accuracy;

  for (std::size_t t = 0; t < config.rounds; ++t) {
    RoundOutcome outcome;
    try {
      outcome = run_round(chief, workers, config.attack, settings, t);
    } catch (const NoParticipantsError&) {
      log.status = RunStatus::no_participants;
      break;
    }
    RoundRecord rec;
    rec.round = t;
    rec.global_accuracy = outcome.global_accuracy;
    rec.n_excluded_total = outcome.excluded_so_far.size();
    rec.newly_excluded = outcome.newly_excluded;
    rec.detection = detection_record(
        t, confusion(outcome.excluded_so_far, log.truth, all_workers), config.beta);
    log.rounds.push_back(std::move(rec));
    log.roles.push_back(std::move(outcome.submitted));
    if (config.target_accuracy > 0.0 && outcome.global_accuracy >= config.target_accuracy) {
      log.status = RunStatus::target_reached;
      break;
    }
  }
  log.events = chief.attestation.events();
  return log;
}

}  // namespace fedmon
