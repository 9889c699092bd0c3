#include "fedmon/report.hpp"

#include <algorithm>
#include <cstdio>

#include "fedmon/errors.hpp"

namespace fedmon {

namespace {

std::string fixed(double v, int places = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::vector<std::string> config_keys(const RunCsv& csv) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : csv.config) keys.push_back(k);
  return keys;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

// Series are indexed by round; y is clamped into [0, 1].
std::string line_chart(const std::string& title, const std::vector<std::string>& labels,
                       const std::vector<std::vector<std::optional<double>>>& series) {
  const double w = 640, h = 360, left = 50, right = 170, top = 30, bottom = 40;
  const double pw = w - left - right, ph = h - top - bottom;
  std::size_t n = 0;
  for (const auto& s : series) n = std::max(n, s.size());
  const double xspan = n > 1 ? static_cast<double>(n - 1) : 1.0;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(w, 0) +
                    "\" height=\"" + fixed(h, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(left, 0) + "\" y=\"18\" font-size=\"13\">" + title + "</text>\n";
  out += "<rect x=\"" + fixed(left, 1) + "\" y=\"" + fixed(top, 1) + "\" width=\"" + fixed(pw, 1) +
         "\" height=\"" + fixed(ph, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = top + ph - ph * k / 4.0;
    out += "<text x=\"" + fixed(left - 6, 1) + "\" y=\"" + fixed(y + 4, 1) +
           "\" text-anchor=\"end\">" + fixed(k / 4.0, 2) + "</text>\n";
  }
  out += "<text x=\"" + fixed(left + pw / 2, 1) + "\" y=\"" + fixed(h - 10, 1) +
         "\" text-anchor=\"middle\">round</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t r = 0; r < series[i].size(); ++r) {
      if (!series[i][r]) continue;
      const double v = std::clamp(*series[i][r], 0.0, 1.0);
      pts += fixed(left + pw * static_cast<double>(r) / xspan, 1) + "," +
             fixed(top + ph - ph * v, 1) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = top + 12 + 14.0 * static_cast<double>(i);
    out += "<text x=\"" + fixed(left + pw + 10, 1) + "\" y=\"" + fixed(ly, 1) + "\" fill=\"" +
           color + "\">" + labels[i] + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

Report build_report(const std::vector<ReportRun>& runs) {
  if (runs.empty()) throw PreconditionError("report: no runs given");
  const auto schema = config_keys(runs.front().csv);
  Report rep;
  for (const auto& run : runs) {
    if (config_keys(run.csv) != schema)
      throw Error("report: schema mismatch between '" + runs.front().label + "' and '" +
                  run.label + "'");
    rep.labels.push_back(run.label);
    rep.round_count = std::max(rep.round_count, run.csv.rows.size());
  }

  for (const auto& run : runs) {
    std::vector<std::optional<double>> acc(rep.round_count);
    for (std::size_t r = 0; r < run.csv.rows.size(); ++r) acc[r] = run.csv.rows[r].global_accuracy;
    rep.accuracy.push_back(std::move(acc));

    const auto s = summarize(run.csv);
    ReportCell cell;
    cell.label = run.label;
    cell.attack = run.csv.get("attack.pattern");
    cell.defense = run.csv.get("defense.enabled") == "true" ? "d" + run.csv.get("defense.delta")
                                                            : std::string("off");
    cell.readout_accuracy = s.readout_accuracy;
    cell.final_accuracy = s.final_accuracy;
    cell.mean_f2 = s.mean_post_delta_f2;
    rep.cells.push_back(std::move(cell));
  }

  for (std::size_t k = 1; k < runs.size(); ++k) {
    std::vector<std::optional<double>> diff(rep.round_count);
    for (std::size_t r = 0; r < rep.round_count; ++r)
      if (rep.accuracy[k][r] && rep.accuracy[0][r]) diff[r] = *rep.accuracy[k][r] - *rep.accuracy[0][r];
    rep.difference.push_back(std::move(diff));
  }
  return rep;
}

std::vector<ReportRun> load_report_runs(const std::vector<std::filesystem::path>& paths) {
  std::vector<ReportRun> runs;
  for (const auto& p : paths) runs.push_back({p.stem().string(), load_run_csv(p)});
  return runs;
}

std::string render_report(const Report& rep) {
  std::vector<std::string> header = {"round"};
  for (const auto& l : rep.labels) header.push_back(l);
  for (std::size_t k = 1; k < rep.labels.size(); ++k)
    header.push_back("diff:" + rep.labels[k]);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < rep.round_count; ++r) {
    std::vector<std::string> row = {std::to_string(r)};
    for (const auto& acc : rep.accuracy) row.push_back(acc[r] ? fixed(*acc[r]) : "-");
    for (const auto& diff : rep.difference) row.push_back(diff[r] ? fixed(*diff[r]) : "-");
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "  " : "") + pad(row[c], width[c]);
    out += "\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);

  out += "\nattack      defense  readout_acc  final_acc  mean_f2  run\n";
  for (const auto& c : rep.cells) {
    std::string line = c.attack;
    line.resize(std::max<std::size_t>(line.size(), 10), ' ');
    std::string def = c.defense;
    def.resize(std::max<std::size_t>(def.size(), 7), ' ');
    out += line + "  " + def + "  " +
           pad(c.readout_accuracy ? fixed(*c.readout_accuracy) : "na", 11) + "  " +
           pad(fixed(c.final_accuracy), 9) + "  " + pad(fixed(c.mean_f2), 7) + "  " + c.label +
           "\n";
  }
  return out;
}

std::string accuracy_svg(const Report& rep) {
  return line_chart("global accuracy", rep.labels, rep.accuracy);
}

std::string f2_svg(const std::vector<ReportRun>& runs) {
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> series;
  for (const auto& run : runs) {
    labels.push_back(run.label);
    std::vector<std::optional<double>> s;
    for (const auto& row : run.csv.rows) s.push_back(row.detection.f2);
    series.push_back(std::move(s));
  }
  return line_chart("F2 of exclusions", labels, series);
}

}  // namespace fedmon
