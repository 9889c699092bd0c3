#include "fedmon/search.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "fedmon/errors.hpp"
#include "fedmon/parallel.hpp"

namespace fedmon {

DeltaRecommendation recommend(std::vector<DeltaScore> table) {
  if (table.empty()) throw PreconditionError("recommend: empty score table");
  std::sort(table.begin(), table.end(),
            [](const DeltaScore& a, const DeltaScore& b) { return a.delta < b.delta; });
  const DeltaScore* best = &table.front();
  for (const auto& s : table) {
    if (s.mean_f2 > best->mean_f2 ||
        (s.mean_f2 == best->mean_f2 && s.mean_final_accuracy > best->mean_final_accuracy))
      best = &s;
  }
  DeltaRecommendation rec;
  rec.delta_t = best->delta;
  rec.seeds = best->seeds;
  rec.table = std::move(table);
  return rec;
}

std::vector<DeltaScore> score_table(const std::vector<RunCsv>& runs) {
  struct Acc {
    double f2 = 0.0, acc = 0.0;
    std::vector<std::uint64_t> seeds;
  };
  std::map<std::size_t, Acc> groups;
  for (const auto& run : runs) {
    if (run.get("defense.enabled") != "true")
      throw PreconditionError("score_table: run without the defense");
    const auto& d = run.get("defense.delta");
    const auto& sd = run.get("seed");
    std::size_t delta = 0;
    std::uint64_t seed = 0;
    std::from_chars(d.data(), d.data() + d.size(), delta);
    std::from_chars(sd.data(), sd.data() + sd.size(), seed);
    const auto s = summarize(run);
    auto& g = groups[delta];
    g.f2 += s.mean_post_delta_f2;
    g.acc += s.final_accuracy;
    g.seeds.push_back(seed);
  }
  std::vector<DeltaScore> out;
  for (auto& [delta, g] : groups) {
    const auto n = static_cast<double>(g.seeds.size());
    out.push_back({delta, g.f2 / n, g.acc / n, std::move(g.seeds)});
  }
  return out;
}

DeltaRecommendation delta_search(const ExperimentConfig& base,
                                 const std::vector<std::size_t>& candidates, std::size_t n_seeds,
                                 std::size_t jobs, const std::filesystem::path& out_dir) {
  if (candidates.empty()) throw PreconditionError("delta_search: no candidate delta");
  if (n_seeds == 0) throw PreconditionError("delta_search: n_seeds must be at least 1");

  std::vector<ExperimentConfig> configs;
  for (auto delta : candidates) {
    for (std::size_t k = 0; k < n_seeds; ++k) {
      auto cfg = base;
      cfg.defense_enabled = true;
      cfg.monitor.delta = delta;
      cfg.seed = base.seed + k;
      cfg.out = (out_dir / (base.name + "-s" + std::to_string(cfg.seed) + "-d" +
                            std::to_string(delta) + ".csv"))
                    .string();
      configs.push_back(std::move(cfg));
    }
  }

  std::vector<RunCsv> runs(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    const auto result = run_experiment(configs[i], {}, !out_dir.empty());
    runs[i] = parse_run_csv(result.csv);
  });
  return recommend(score_table(runs));
}

std::string render_recommendation(const DeltaRecommendation& rec) {
  std::string out = "delta  mean_f2  mean_final_accuracy  seeds\n";
  for (const auto& s : rec.table) {
    std::string seeds;
    for (auto sd : s.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(sd);
    out += std::to_string(s.delta) + "  " + format_double(s.mean_f2) + "  " +
           format_double(s.mean_final_accuracy) + "  " + seeds + "\n";
  }
  out += "recommended delta_t = " + std::to_string(rec.delta_t) + "\n";
  return out;
}

}  // namespace fedmon
