#include "fedmon/grid.hpp"

#include <set>

#include "fedmon/errors.hpp"
#include "fedmon/parallel.hpp"

namespace fedmon {

namespace {

const AttackKind kAttacks[] = {AttackKind::static_set, AttackKind::pretence,
                               AttackKind::randomized};

GridEntry make_entry(const ExperimentConfig& base, AttackKind attack,
                     std::optional<std::size_t> delta, const std::filesystem::path& out_dir) {
  GridEntry e;
  e.config = base;
  e.config.attack.kind = attack;
  e.config.defense_enabled = delta.has_value();
  if (delta) e.config.monitor.delta = *delta;
  e.run_id = base.name + "-s" + std::to_string(base.seed) + "-" + std::string(to_string(attack)) +
             (delta ? "-d" + std::to_string(*delta) : std::string("-nodef"));
  e.config.out = (out_dir / (e.run_id + ".csv")).string();
  return e;
}

}  // namespace

GridManifest oat_grid(const std::vector<ExperimentConfig>& use_cases,
                      const std::vector<std::size_t>& delta_set,
                      const std::filesystem::path& out_dir) {
  if (use_cases.empty()) throw PreconditionError("oat_grid: no use case given");
  if (delta_set.empty()) throw PreconditionError("oat_grid: delta set is empty");

  GridManifest manifest;
  for (const auto& base : use_cases) {
    manifest.push_back(make_entry(base, AttackKind::none, std::nullopt, out_dir));
    for (auto attack : kAttacks) manifest.push_back(make_entry(base, attack, std::nullopt, out_dir));
    for (auto attack : kAttacks)
      for (auto delta : delta_set) manifest.push_back(make_entry(base, attack, delta, out_dir));
  }

  std::set<std::string> seen;
  for (const auto& e : manifest)
    if (!seen.insert(e.run_id).second)
      throw ConfigError("name", "duplicate run id '" + e.run_id +
                                    "'; give each use case a distinct name or seed");
  return manifest;
}

std::string manifest_text(const GridManifest& manifest) {
  std::string out;
  for (const auto& e : manifest) out += e.run_id + "\t" + e.config.out + "\n";
  return out;
}

std::vector<GridRunResult> run_grid(const GridManifest& manifest, std::size_t jobs,
                                    std::size_t threads_per_run) {
  std::vector<GridRunResult> results(manifest.size());
  RunOptions opts;
  opts.threads = threads_per_run;
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    auto& r = results[i];
    r.run_id = manifest[i].run_id;
    r.csv = manifest[i].config.out;
    try {
      r.summary = run_experiment(manifest[i].config, opts).summary;
    } catch (const std::exception& ex) {
      r.error = r.run_id + ": " + ex.what();
    }
  });
  return results;
}

}  // namespace fedmon
