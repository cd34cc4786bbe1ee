#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace imgeval {

struct ReportRow {
  std::string pair_id;
  std::vector<double> values;  // aligned with MetricReport::metrics
};

/// Per-pair metric table. Every row carries one value per metric; values are
/// finite except PSNR, which may be +infinity.
struct MetricReport {
  std::vector<std::string> metrics;
  std::vector<ReportRow> rows;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();

  /// Column index of a metric; throws ConfigError if unknown.
  std::size_t column(const std::string& metric) const;
  std::vector<double> values(const std::string& metric) const;
  /// Appends a row; throws DimensionError on a length mismatch and
  /// FormatError on a non-finite value outside the psnr column.
  void add_row(std::string pair_id, std::vector<double> values);
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;   // sample std over finite values
  std::size_t finite = 0;
  std::size_t infinite = 0;
};

/// Mean/std per metric over finite values; infinities are counted, not averaged.
std::map<std::string, MetricSummary> summarize(const MetricReport& r);

/// Shortest decimal text that round-trips a double; +inf is written "inf".
std::string format_value(double v);
/// Parses format_value output (and "inf"/"+inf"). Throws FormatError.
double parse_value(const std::string& s);

/// CSV: header "pair_id,<metric>,...", one line per row.
std::string report_to_csv(const MetricReport& r);
/// JSON with params, provenance, rows, summary and flags; "inf" as a string.
nlohmann::json report_to_json(const MetricReport& r);
MetricReport report_from_csv(const std::string& text);
MetricReport report_from_json(const nlohmann::json& j);
/// Dispatches on extension (.json, otherwise CSV).
MetricReport load_report(const std::filesystem::path& path);

}  // namespace imgeval
