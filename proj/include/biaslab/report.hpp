#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "biaslab/metrics.hpp"

namespace biaslab {

// One observation: a (trial, method-or-strategy, metric) value, optionally
// paired with the truth it estimates.
struct ReportRow {
  std::size_t trial = 0;
  std::string group;
  std::string metric;
  double value = 0.0;
  double truth = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
};

struct ReportAggregate {
  std::string group;
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();               // vs truth
  double mean_signed_error = std::numeric_limits<double>::quiet_NaN();  // estimate - truth
  double avg_rank = std::numeric_limits<double>::quiet_NaN();
};

enum class RankBy {
  abs_error,  // |value - truth|, ascending (evaluation strategies)
  value       // metric value with its orientation (training methods)
};

struct RunReport {
  std::string mode;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::vector<ReportAggregate> aggregates;
};

// Aggregates: mean and standard error per (group, metric); RMSE and signed
// error where truth is present; average ranks per group across (trial,
// metric) cells with midranks for ties. Failed rows are excluded from the
// affected trial's ranking.
RunReport make_report(const std::string& mode, std::uint64_t config_hash, std::uint64_t seed,
                      std::vector<ReportRow> rows, RankBy rank_by,
                      const std::map<std::string, Orientation>& metric_orientations);

// raw_<hash>.csv and aggregate_<hash>.csv (written atomically); empty row
// sets yield header-only files with a warning.
void emit_report_csvs(const RunReport& report, const std::string& dir);

// Recompute aggregates from a raw CSV written by emit_report_csvs; used by
// the consistency checks.
std::vector<ReportRow> read_report_rows_csv(const std::string& path);

std::string report_raw_path(const RunReport& report, const std::string& dir);
std::string report_aggregate_path(const RunReport& report, const std::string& dir);

}  // namespace biaslab
