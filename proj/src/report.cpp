#include "biaslab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

struct Key {
  std::string group, metric;
  bool operator<(const Key& o) const {
    return group != o.group ? group < o.group : metric < o.metric;
  }
};

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("report: cannot open '" + tmp + "'");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("report: rename to '" + path + "' failed");
}

}  // namespace

RunReport make_report(const std::string& mode, std::uint64_t config_hash, std::uint64_t seed,
                      std::vector<ReportRow> rows, RankBy rank_by,
                      const std::map<std::string, Orientation>& metric_orientations) {
  RunReport rep;
  rep.mode = mode;
  rep.config_hash = config_hash;
  rep.seed = seed;
  rep.rows = std::move(rows);

  std::map<Key, std::vector<const ReportRow*>> cells;
  for (const auto& r : rep.rows)
    if (!r.failed) cells[{r.group, r.metric}].push_back(&r);

  // Mean / SE / RMSE / signed error per (group, metric).
  std::map<Key, ReportAggregate> agg;
  for (const auto& [key, list] : cells) {
    ReportAggregate a;
    a.group = key.group;
    a.metric = key.metric;
    a.n = list.size();
    double sum = 0;
    for (const auto* r : list) sum += r->value;
    a.mean = sum / static_cast<double>(a.n);
    double ss = 0;
    for (const auto* r : list) ss += (r->value - a.mean) * (r->value - a.mean);
    a.std_error = a.n > 1 ? std::sqrt(ss / static_cast<double>(a.n - 1)) /
                                std::sqrt(static_cast<double>(a.n))
                          : 0.0;
    bool any_truth = false;
    double se2 = 0, signed_sum = 0;
    std::size_t n_truth = 0;
    for (const auto* r : list) {
      if (std::isnan(r->truth)) continue;
      any_truth = true;
      ++n_truth;
      se2 += (r->value - r->truth) * (r->value - r->truth);
      signed_sum += r->value - r->truth;
    }
    if (any_truth) {
      a.rmse = std::sqrt(se2 / static_cast<double>(n_truth));
      a.mean_signed_error = signed_sum / static_cast<double>(n_truth);
    }
    agg[key] = a;
  }

  // Average ranks: rank groups within each (trial, metric) cell, midranks
  // for ties, rank 1 = best.
  std::map<std::pair<std::size_t, std::string>, std::vector<const ReportRow*>> rank_cells;
  for (const auto& r : rep.rows)
    if (!r.failed) rank_cells[{r.trial, r.metric}].push_back(&r);

  std::map<std::string, std::pair<double, std::size_t>> rank_sums;  // group -> (sum, count)
  for (auto& [cell_key, list] : rank_cells) {
    if (list.size() < 2) continue;
    auto score_of = [&](const ReportRow* r) -> double {
      if (rank_by == RankBy::abs_error) return std::abs(r->value - r->truth);
      auto it = metric_orientations.find(r->metric);
      const Orientation o = it == metric_orientations.end() ? Orientation::lower_better : it->second;
      return o == Orientation::lower_better ? r->value : -r->value;
    };
    std::vector<std::pair<double, const ReportRow*>> scored;
    for (const auto* r : list) {
      const double s = score_of(r);
      if (!std::isnan(s)) scored.emplace_back(s, r);
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t i = 0;
    while (i < scored.size()) {
      std::size_t j = i;
      while (j < scored.size() && scored[j].first == scored[i].first) ++j;
      const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for (std::size_t t = i; t < j; ++t) {
        auto& [sum, count] = rank_sums[scored[t].second->group];
        sum += midrank;
        ++count;
      }
      i = j;
    }
  }
  for (auto& [key, a] : agg) {
    auto it = rank_sums.find(key.group);
    if (it != rank_sums.end() && it->second.second > 0)
      a.avg_rank = it->second.first / static_cast<double>(it->second.second);
  }

  for (auto& [key, a] : agg) rep.aggregates.push_back(a);
  return rep;
}

std::string report_raw_path(const RunReport& report, const std::string& dir) {
  return dir + "/raw_" + hash_hex(report.config_hash) + ".csv";
}

std::string report_aggregate_path(const RunReport& report, const std::string& dir) {
  return dir + "/aggregate_" + hash_hex(report.config_hash) + ".csv";
}

void emit_report_csvs(const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (report.rows.empty()) warn("report: no rows; emitting header-only CSVs");

  std::ostringstream raw;
  raw << "trial,group,metric,value,truth,failed\n";
  for (const auto& r : report.rows)
    raw << r.trial << ',' << r.group << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.truth) << ',' << (r.failed ? 1 : 0) << '\n';
  write_atomic(report_raw_path(report, dir), raw.str());

  std::ostringstream ag;
  ag << "group,metric,n,mean,std_error,rmse,mean_signed_error,avg_rank\n";
  for (const auto& a : report.aggregates)
    ag << a.group << ',' << a.metric << ',' << a.n << ',' << format_double(a.mean) << ','
       << format_double(a.std_error) << ',' << format_double(a.rmse) << ','
       << format_double(a.mean_signed_error) << ',' << format_double(a.avg_rank) << '\n';
  write_atomic(report_aggregate_path(report, dir), ag.str());
}

std::vector<ReportRow> read_report_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("report: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("report: empty file '" + path + "'");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    ReportRow r;
    std::getline(ss, cell, ',');
    r.trial = static_cast<std::size_t>(std::stoull(cell));
    std::getline(ss, r.group, ',');
    std::getline(ss, r.metric, ',');
    std::getline(ss, cell, ',');
    r.value = std::strtod(cell.c_str(), nullptr);
    std::getline(ss, cell, ',');
    r.truth = std::strtod(cell.c_str(), nullptr);
    std::getline(ss, cell, ',');
    r.failed = cell == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace biaslab
