#include "imgeval/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"

namespace imgeval {

std::size_t MetricReport::column(const std::string& metric) const {
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (metrics[i] == metric) return i;
  }
  throw ConfigError("unknown metric '" + metric + "'");
}

std::vector<double> MetricReport::values(const std::string& metric) const {
  const std::size_t c = column(metric);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.values[c]);
  return out;
}

void MetricReport::add_row(std::string pair_id, std::vector<double> values) {
  if (values.size() != metrics.size()) {
    throw DimensionError("report row '" + pair_id + "' has " + std::to_string(values.size()) +
                         " values for " + std::to_string(metrics.size()) + " metrics");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool inf_ok = metrics[i] == "psnr" && values[i] == INFINITY;
    if (!std::isfinite(values[i]) && !inf_ok) {
      throw FormatError("report row '" + pair_id + "': non-finite " + metrics[i]);
    }
  }
  rows.push_back({std::move(pair_id), std::move(values)});
}

std::map<std::string, MetricSummary> summarize(const MetricReport& r) {
  std::map<std::string, MetricSummary> out;
  for (std::size_t c = 0; c < r.metrics.size(); ++c) {
    MetricSummary s;
    double sum = 0.0;
    for (const auto& row : r.rows) {
      if (std::isfinite(row.values[c])) {
        sum += row.values[c];
        ++s.finite;
      } else {
        ++s.infinite;
      }
    }
    if (s.finite > 0) s.mean = sum / static_cast<double>(s.finite);
    if (s.finite > 1) {
      double ss = 0.0;
      for (const auto& row : r.rows) {
        if (std::isfinite(row.values[c])) ss += (row.values[c] - s.mean) * (row.values[c] - s.mean);
      }
      s.std = std::sqrt(ss / static_cast<double>(s.finite - 1));
    }
    out[r.metrics[c]] = s;
  }
  return out;
}

std::string format_value(double v) {
  if (v == INFINITY) return "inf";
  if (v == -INFINITY) return "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_value(const std::string& s) {
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("cannot parse metric value '" + s + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json json_value(double v) {
  if (std::isfinite(v)) return v;
  return format_value(v);
}

}  // namespace

std::string report_to_csv(const MetricReport& r) {
  std::string out = "pair_id";
  for (const auto& m : r.metrics) out += "," + m;
  out += "\n";
  for (const auto& row : r.rows) {
    out += row.pair_id;
    for (double v : row.values) out += "," + format_value(v);
    out += "\n";
  }
  return out;
}

nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr = {{"pair_id", row.pair_id}};
    for (std::size_t c = 0; c < r.metrics.size(); ++c) jr[r.metrics[c]] = json_value(row.values[c]);
    rows.push_back(std::move(jr));
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [name, s] : summarize(r)) {
    summary[name] = {{"mean", s.mean}, {"std", s.std}, {"finite", s.finite}, {"infinite", s.infinite}};
  }
  nlohmann::json fsim_above_one = nlohmann::json::array();
  for (std::size_t c = 0; c < r.metrics.size(); ++c) {
    if (r.metrics[c] != "fsim") continue;
    for (const auto& row : r.rows) {
      if (row.values[c] > 1.0) fsim_above_one.push_back(row.pair_id);
    }
  }
  return {{"metrics", r.metrics},
          {"params", r.params},
          {"provenance", r.provenance},
          {"rows", rows},
          {"summary", summary},
          {"flags", {{"fsim_above_one", fsim_above_one}}}};
}

MetricReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  MetricReport r;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (!header) {
      if (cells.empty() || cells[0] != "pair_id") {
        throw FormatError("report CSV must start with a 'pair_id' header column");
      }
      r.metrics.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != r.metrics.size() + 1) {
      throw FormatError("report CSV row '" + line + "' has the wrong number of cells");
    }
    std::vector<double> values;
    for (std::size_t i = 1; i < cells.size(); ++i) values.push_back(parse_value(cells[i]));
    r.add_row(cells[0], std::move(values));
  }
  if (!header) throw FormatError("report CSV is empty");
  return r;
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.metrics = j.at("metrics").get<std::vector<std::string>>();
    r.params = j.value("params", nlohmann::json::object());
    r.provenance = j.value("provenance", nlohmann::json::object());
    for (const auto& jr : j.at("rows")) {
      std::vector<double> values;
      for (const auto& m : r.metrics) {
        const auto& v = jr.at(m);
        values.push_back(v.is_string() ? parse_value(v.get<std::string>()) : v.get<double>());
      }
      r.add_row(jr.at("pair_id").get<std::string>(), std::move(values));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

MetricReport load_report(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    try {
      return report_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return report_from_csv(text);
}

}  // namespace imgeval
