#include "fedmon/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fedmon/errors.hpp"

namespace fedmon {

namespace {

std::string join_ids(const std::set<std::size_t>& ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out += ";";
    out += std::to_string(id);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_real(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("csv: bad number '" + s + "'");
  return v;
}

std::size_t to_count(const std::string& s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("csv: bad integer '" + s + "'");
  return v;
}

RunSummary summarize_rows(const std::vector<RoundRecord>& rows, bool defense_enabled,
                          std::size_t delta, std::size_t readout_round, std::string status) {
  RunSummary s;
  s.status = std::move(status);
  s.rounds_run = rows.size();
  s.readout_round = readout_round;
  if (readout_round < rows.size()) s.readout_accuracy = rows[readout_round].global_accuracy;
  if (!rows.empty()) s.final_accuracy = rows.back().global_accuracy;

  const std::size_t first = defense_enabled ? delta : 0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : rows) {
    if (r.round < first) continue;
    sum += r.detection.f2;
    ++count;
  }
  s.mean_post_delta_f2 = count == 0 ? 0.0 : sum / static_cast<double>(count);
  return s;
}

}  // namespace

const std::string& RunCsv::get(const std::string& key) const {
  for (const auto& [k, v] : config)
    if (k == key) return v;
  throw Error("csv: config key '" + key + "' missing from header");
}

std::string summary_line(const RunSummary& s) {
  std::string out = "status=" + s.status + " rounds=" + std::to_string(s.rounds_run) +
                    " readout_round=" + std::to_string(s.readout_round) + " readout_accuracy=";
  out += s.readout_accuracy ? format_double(*s.readout_accuracy) : "na";
  out += " final_accuracy=" + format_double(s.final_accuracy);
  out += " mean_post_delta_f2=" + format_double(s.mean_post_delta_f2);
  return out;
}

RunSummary summarize(const ExperimentConfig& config, const ExperimentLog& log) {
  return summarize_rows(log.rounds, config.defense_enabled, config.monitor.delta,
                        config.readout_round, std::string(to_string(log.status)));
}

RunSummary summarize(const RunCsv& csv) {
  return summarize_rows(csv.rows, csv.get("defense.enabled") == "true",
                        to_count(csv.get("defense.delta")), to_count(csv.get("readout_round")),
                        csv.status);
}

std::string render_csv(const ExperimentConfig& config, const ExperimentLog& log) {
  std::ostringstream out;
  out << "# fedmon run\n";
  for (const auto& [k, v] : to_entries(config)) out << "# " << k << " = " << v << "\n";
  out << "# initial_accuracy = " << format_double(log.initial_accuracy) << "\n";
  out << "# status = " << to_string(log.status) << "\n";
  out << kCsvHeader << "\n";
  for (const auto& r : log.rounds) {
    const auto& d = r.detection;
    out << r.round << ',' << format_double(r.global_accuracy) << ',' << r.n_excluded_total << ','
        << join_ids(r.newly_excluded) << ',' << d.counts.tp << ',' << d.counts.fp << ','
        << d.counts.fn << ',' << d.counts.tn << ',' << format_double(d.precision) << ','
        << format_double(d.recall) << ',' << format_double(d.f2) << "\n";
  }
  out << "# summary " << summary_line(summarize(config, log)) << "\n";
  return out.str();
}

RunCsv parse_run_csv(const std::string& text) {
  RunCsv csv;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (saw_header) continue;  // trailing summary
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      auto key = line.substr(2, eq - 2);
      auto value = line.substr(eq + 3);
      if (key == "initial_accuracy") csv.initial_accuracy = to_real(value);
      else if (key == "status") csv.status = value;
      else csv.config.emplace_back(std::move(key), std::move(value));
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader) throw Error("csv: unexpected column header '" + line + "'");
      saw_header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 11) throw Error("csv: row has wrong number of columns: " + line);
    RoundRecord r;
    r.round = to_count(cells[0]);
    r.global_accuracy = to_real(cells[1]);
    r.n_excluded_total = to_count(cells[2]);
    if (!cells[3].empty())
      for (const auto& id : split(cells[3], ';')) r.newly_excluded.insert(to_count(id));
    r.detection.round = r.round;
    r.detection.counts = {to_count(cells[4]), to_count(cells[5]), to_count(cells[6]),
                          to_count(cells[7])};
    r.detection.precision = to_real(cells[8]);
    r.detection.recall = to_real(cells[9]);
    r.detection.f2 = to_real(cells[10]);
    csv.rows.push_back(std::move(r));
  }
  if (!saw_header) throw Error("csv: missing column header");
  return csv;
}

RunCsv load_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_csv(ss.str());
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options, bool write) {
  RunResult result;
  result.log = run_training(config, options);
  result.summary = summarize(config, result.log);
  result.csv = render_csv(config, result.log);
  if (write) {
    const std::filesystem::path out(config.out);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out.string());
    f << result.csv;
    if (!f) throw Error("write failed for " + out.string());
  }
  return result;
}

}  // namespace fedmon
