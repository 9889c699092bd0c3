#include "fedmon/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fedmon/errors.hpp"

namespace fedmon {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

template <typename T>
std::string join(const T& items) {
  std::string out;
  for (const auto& x : items) {
    if (!out.empty()) out += ",";
    out += std::to_string(x);
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, out);
  if (value.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected a non-negative integer, got '" + value + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, out);
  if (value.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected a real number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_uint_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) out.push_back(parse_uint(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto uint_field = [](auto member) {
      return [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
        member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_uint(k, v));
      };
    };
    auto real_field = [](auto member) {
      return [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
        member(c) = parse_real(k, v);
      };
    };

    t["name"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      if (v.empty() || v.find_first_of(" ,/\\") != std::string::npos)
        throw ConfigError(k, "name must be non-empty without spaces, commas or slashes");
      c.name = v;
    };
    t["dataset.kind"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      if (v == "blobs") c.dataset.kind = DatasetKind::blobs;
      else if (v == "mnist") c.dataset.kind = DatasetKind::mnist;
      else throw ConfigError(k, "expected blobs or mnist, got '" + v + "'");
    };
    t["dataset.path"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.dataset.path = v;
    };
    t["dataset.seed"] = uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.seed; });
    t["dataset.classes"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.classes; });
    t["dataset.dim"] = uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.dim; });
    t["dataset.spread"] =
        real_field([](ExperimentConfig& c) -> auto& { return c.dataset.spread; });
    t["dataset.train"] = uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.train; });
    t["dataset.validation"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.validation; });
    t["dataset.test"] = uint_field([](ExperimentConfig& c) -> auto& { return c.dataset.test; });
    t["model.layers"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.layers = v == "auto" ? std::vector<std::size_t>{} : parse_uint_list(k, v);
    };
    t["train.epochs"] = uint_field([](ExperimentConfig& c) -> auto& { return c.train.epochs; });
    t["train.batch"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.train.batch_size; });
    t["train.lr"] = real_field([](ExperimentConfig& c) -> auto& { return c.train.learning_rate; });
    t["workers.count"] = uint_field([](ExperimentConfig& c) -> auto& { return c.workers; });
    t["workers.distribution"] = [](ExperimentConfig& c, const std::string& k,
                                   const std::string& v) {
      if (v == "full_copy") c.distribution = DistributionMode::full_copy;
      else if (v == "equal_shards") c.distribution = DistributionMode::equal_shards;
      else throw ConfigError(k, "expected full_copy or equal_shards, got '" + v + "'");
    };
    t["workers.per_round"] = uint_field([](ExperimentConfig& c) -> auto& { return c.per_round; });
    t["attack.pattern"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      try {
        c.attack.kind = attack_kind_from_string(v);
      } catch (const PreconditionError& e) {
        throw ConfigError(k, e.what());
      }
    };
    t["attack.compromised"] = [](ExperimentConfig& c, const std::string& k,
                                 const std::string& v) {
      auto ids = parse_uint_list(k, v);
      c.attack.compromised = std::set<std::size_t>(ids.begin(), ids.end());
    };
    t["attack.start_round"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.attack.start_round; });
    t["attack.flip_prob"] =
        real_field([](ExperimentConfig& c) -> auto& { return c.attack.flip_prob; });
    t["attack.mu"] = real_field([](ExperimentConfig& c) -> auto& { return c.fabrication.mu; });
    t["attack.sigma"] =
        real_field([](ExperimentConfig& c) -> auto& { return c.fabrication.sigma; });
    t["aggregation.rule"] = [](ExperimentConfig& c, const std::string& k,
                               const std::string& v) {
      try {
        c.aggregation.kind = aggregation_kind_from_string(v);
      } catch (const PreconditionError& e) {
        throw ConfigError(k, e.what());
      }
    };
    t["aggregation.m"] = uint_field([](ExperimentConfig& c) -> auto& { return c.aggregation.m; });
    t["aggregation.tol"] =
        real_field([](ExperimentConfig& c) -> auto& { return c.aggregation.tol; });
    t["aggregation.max_iter"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.aggregation.max_iter; });
    t["defense.enabled"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.defense_enabled = parse_bool(k, v);
    };
    t["defense.delta"] = uint_field([](ExperimentConfig& c) -> auto& { return c.monitor.delta; });
    t["defense.tau"] = real_field([](ExperimentConfig& c) -> auto& { return c.monitor.tolerance; });
    t["defense.window"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.monitor.window; });
    t["defense.strikes"] =
        uint_field([](ExperimentConfig& c) -> auto& { return c.monitor.strikes_to_exclude; });
    t["rounds"] = uint_field([](ExperimentConfig& c) -> auto& { return c.rounds; });
    t["seed"] = uint_field([](ExperimentConfig& c) -> auto& { return c.seed; });
    t["readout_round"] = uint_field([](ExperimentConfig& c) -> auto& { return c.readout_round; });
    t["target_accuracy"] =
        real_field([](ExperimentConfig& c) -> auto& { return c.target_accuracy; });
    t["beta"] = real_field([](ExperimentConfig& c) -> auto& { return c.beta; });
    t["out"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; };
    return t;
  }();
  return table;
}

}  // namespace

MlpArchitecture ExperimentConfig::architecture() const {
  if (!layers.empty()) return {layers};
  const std::size_t in = dataset.kind == DatasetKind::mnist ? 784 : dataset.dim;
  const std::size_t out = dataset.kind == DatasetKind::mnist ? 10 : dataset.classes;
  return {{in, 30, out}};
}

void ExperimentConfig::validate() const {
  std::vector<ConfigError::Issue> issues;
  auto fail = [&](std::string key, std::string msg) {
    issues.push_back({std::move(key), std::move(msg)});
  };

  if (dataset.kind == DatasetKind::blobs) {
    if (dataset.classes < 2) fail("dataset.classes", "need at least 2 classes");
    if (dataset.dim == 0) fail("dataset.dim", "must be positive");
    if (!(dataset.spread >= 0.0) || !std::isfinite(dataset.spread))
      fail("dataset.spread", "must be finite and non-negative");
  } else if (dataset.path.empty()) {
    fail("dataset.path", "required for dataset.kind = mnist");
  }
  if (dataset.train == 0) fail("dataset.train", "must be positive");
  if (dataset.validation == 0) fail("dataset.validation", "must be positive");
  if (dataset.test == 0) fail("dataset.test", "must be positive");

  const auto arch = architecture();
  if (arch.layer_sizes.size() < 2) {
    fail("model.layers", "need at least input and output sizes");
  } else {
    for (auto n : arch.layer_sizes)
      if (n == 0) fail("model.layers", "layer sizes must be positive");
    const std::size_t want_in = dataset.kind == DatasetKind::mnist ? 784 : dataset.dim;
    const std::size_t want_out = dataset.kind == DatasetKind::mnist ? 10 : dataset.classes;
    if (arch.input_size() != want_in) fail("model.layers", "input size must match dataset");
    if (arch.class_count() != want_out) fail("model.layers", "output size must match classes");
  }

  if (train.batch_size == 0) fail("train.batch", "must be positive");
  if (!(train.learning_rate >= 0.0) || !std::isfinite(train.learning_rate))
    fail("train.lr", "must be finite and non-negative");

  if (workers == 0) fail("workers.count", "need at least one worker");
  if (per_round > workers) fail("workers.per_round", "cannot exceed workers.count");
  if (distribution == DistributionMode::equal_shards && dataset.train < workers)
    fail("workers.distribution", "equal_shards needs at least one example per worker");
  const std::size_t local_size = distribution == DistributionMode::full_copy
                                     ? dataset.train
                                     : (workers == 0 ? 0 : dataset.train / workers);
  if (train.batch_size > local_size && local_size > 0)
    fail("train.batch", "exceeds the local dataset size");

  for (auto id : attack.compromised)
    if (id >= workers) fail("attack.compromised", "worker id " + std::to_string(id) +
                                                      " is not below workers.count");
  if (!(attack.flip_prob >= 0.0 && attack.flip_prob <= 1.0))
    fail("attack.flip_prob", "must lie in [0, 1]");
  if (!(fabrication.sigma > 0.0) || !std::isfinite(fabrication.sigma))
    fail("attack.sigma", "must be positive and finite");
  if (!std::isfinite(fabrication.mu)) fail("attack.mu", "must be finite");

  const std::size_t participants = per_round == 0 ? workers : per_round;
  if (participants < aggregation.min_inputs())
    fail("aggregation.m", std::string(to_string(aggregation.kind)) + " with m=" +
                              std::to_string(aggregation.m) + " needs at least " +
                              std::to_string(aggregation.min_inputs()) + " participants");
  if (!(aggregation.tol > 0.0)) fail("aggregation.tol", "must be positive");
  if (aggregation.max_iter == 0) fail("aggregation.max_iter", "must be positive");

  if (monitor.window == 0) fail("defense.window", "must be at least 1");
  if (monitor.strikes_to_exclude == 0) fail("defense.strikes", "must be at least 1");
  if (monitor.strikes_to_exclude > monitor.window)
    fail("defense.strikes", "cannot exceed defense.window");
  if (!std::isfinite(monitor.tolerance)) fail("defense.tau", "must be finite");

  if (!(target_accuracy >= 0.0 && target_accuracy <= 1.0))
    fail("target_accuracy", "must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta", "must be non-negative");
  if (out.empty()) fail("out", "must not be empty");

  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<std::pair<std::string, std::string>> to_entries(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("name", c.name);
  e.emplace_back("dataset.kind", c.dataset.kind == DatasetKind::blobs ? "blobs" : "mnist");
  e.emplace_back("dataset.path", c.dataset.path);
  e.emplace_back("dataset.seed", std::to_string(c.dataset.seed));
  e.emplace_back("dataset.classes", std::to_string(c.dataset.classes));
  e.emplace_back("dataset.dim", std::to_string(c.dataset.dim));
  e.emplace_back("dataset.spread", format_double(c.dataset.spread));
  e.emplace_back("dataset.train", std::to_string(c.dataset.train));
  e.emplace_back("dataset.validation", std::to_string(c.dataset.validation));
  e.emplace_back("dataset.test", std::to_string(c.dataset.test));
  e.emplace_back("model.layers", join(c.architecture().layer_sizes));
  e.emplace_back("train.epochs", std::to_string(c.train.epochs));
  e.emplace_back("train.batch", std::to_string(c.train.batch_size));
  e.emplace_back("train.lr", format_double(c.train.learning_rate));
  e.emplace_back("workers.count", std::to_string(c.workers));
  e.emplace_back("workers.distribution",
                 c.distribution == DistributionMode::full_copy ? "full_copy" : "equal_shards");
  e.emplace_back("workers.per_round", std::to_string(c.per_round));
  e.emplace_back("attack.pattern", std::string(to_string(c.attack.kind)));
  e.emplace_back("attack.compromised", join(c.attack.compromised));
  e.emplace_back("attack.start_round", std::to_string(c.attack.start_round));
  e.emplace_back("attack.flip_prob", format_double(c.attack.flip_prob));
  e.emplace_back("attack.mu", format_double(c.fabrication.mu));
  e.emplace_back("attack.sigma", format_double(c.fabrication.sigma));
  e.emplace_back("aggregation.rule", std::string(to_string(c.aggregation.kind)));
  e.emplace_back("aggregation.m", std::to_string(c.aggregation.m));
  e.emplace_back("aggregation.tol", format_double(c.aggregation.tol));
  e.emplace_back("aggregation.max_iter", std::to_string(c.aggregation.max_iter));
  e.emplace_back("defense.enabled", c.defense_enabled ? "true" : "false");
  e.emplace_back("defense.delta", std::to_string(c.monitor.delta));
  e.emplace_back("defense.tau", format_double(c.monitor.tolerance));
  e.emplace_back("defense.window", std::to_string(c.monitor.window));
  e.emplace_back("defense.strikes", std::to_string(c.monitor.strikes_to_exclude));
  e.emplace_back("rounds", std::to_string(c.rounds));
  e.emplace_back("seed", std::to_string(c.seed));
  e.emplace_back("readout_round", std::to_string(c.readout_round));
  e.emplace_back("target_accuracy", format_double(c.target_accuracy));
  e.emplace_back("beta", format_double(c.beta));
  e.emplace_back("out", c.out);
  return e;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key");
  // Signed input reaches unsigned fields as a parse failure; name the key.
  if (!value.empty() && value.front() == '-' && key != "attack.mu" && key != "defense.tau")
    throw ConfigError(key, "must not be negative, got '" + value + "'");
  it->second(config, key, value);
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides) {
  ExperimentConfig config;
  std::vector<ConfigError::Issue> issues;
  auto apply = [&](const std::string& key, const std::string& value) {
    try {
      apply_setting(config, key, value);
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  };

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      issues.push_back({"line " + std::to_string(lineno), "expected 'key = value'"});
      continue;
    }
    apply(trim(std::string_view(body).substr(0, eq)),
          trim(std::string_view(body).substr(eq + 1)));
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      issues.push_back({ov, "override must be key=value"});
      continue;
    }
    apply(trim(std::string_view(ov).substr(0, eq)), trim(std::string_view(ov).substr(eq + 1)));
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

}  // namespace fedmon
