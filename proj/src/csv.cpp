#include "biaslab/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_csv: cannot open file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("load_csv: empty file '" + path + "'");
  const auto header = split_line(line);

  int label_col = -1, accepted_col = -1, id_col = -1;
  std::vector<std::size_t> feature_cols;
  Dataset d;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string name = strip(header[j]);
    if (!schema.label_column.empty() && name == schema.label_column)
      label_col = static_cast<int>(j);
    else if (!schema.accepted_column.empty() && name == schema.accepted_column)
      accepted_col = static_cast<int>(j);
    else if (!schema.id_column.empty() && name == schema.id_column)
      id_col = static_cast<int>(j);
    else {
      feature_cols.push_back(j);
      d.feature_names.push_back(name);
    }
  }
  if (!schema.label_column.empty() && label_col < 0)
    throw ConfigError("load_csv: label column '" + schema.label_column + "' not found");
  if (!schema.accepted_column.empty() && accepted_col < 0)
    throw ConfigError("load_csv: accepted column '" + schema.accepted_column + "' not found");
  if (!schema.id_column.empty() && id_col < 0)
    throw ConfigError("load_csv: id column '" + schema.id_column + "' not found");
  if (feature_cols.empty()) throw ConfigError("load_csv: no feature columns in '" + path + "'");

  d.n_cols = feature_cols.size();
  std::set<std::int64_t> seen_ids;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++row_no;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ConfigError("load_csv: row " + std::to_string(row_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    for (std::size_t j : feature_cols) {
      const std::string cell = strip(cells[j]);
      if (cell.empty())
        throw ConfigError("load_csv: missing feature cell at row " + std::to_string(row_no));
      errno = 0;
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (errno != 0 || end == cell.c_str() || *end != '\0')
        throw ConfigError("load_csv: non-numeric feature cell '" + cell + "' at row " +
                          std::to_string(row_no));
      d.features.push_back(v);
    }
    if (label_col >= 0) {
      const std::string cell = strip(cells[label_col]);
      if (cell.empty()) {
        d.labels.push_back(kMissingLabel);
      } else if (cell == "0") {
        d.labels.push_back(0);
      } else if (cell == "1") {
        d.labels.push_back(1);
      } else {
        throw ConfigError("load_csv: label outside {0,1} at row " + std::to_string(row_no));
      }
    }
    if (accepted_col >= 0) {
      const std::string cell = strip(cells[accepted_col]);
      if (cell != "0" && cell != "1")
        throw ConfigError("load_csv: accepted flag outside {0,1} at row " +
                          std::to_string(row_no));
      d.accepted.push_back(cell == "1" ? 1 : 0);
    }
    if (id_col >= 0) {
      const std::string cell = strip(cells[id_col]);
      errno = 0;
      char* end = nullptr;
      long long v = std::strtoll(cell.c_str(), &end, 10);
      if (errno != 0 || end == cell.c_str() || *end != '\0')
        throw ConfigError("load_csv: non-integer id at row " + std::to_string(row_no));
      if (!seen_ids.insert(v).second)
        throw ConfigError("load_csv: duplicate id " + cell + " at row " + std::to_string(row_no));
      d.ids.push_back(v);
    } else {
      d.ids.push_back(static_cast<std::int64_t>(row_no - 1));
    }
  }
  // Labeled non-accepted rows are legal in files (unbiased samples); flag if so.
  if (!d.labels.empty() && !d.accepted.empty()) {
    for (std::size_t i = 0; i < d.rows(); ++i)
      if (d.labels[i] != kMissingLabel && d.accepted[i] == 0) {
        d.unbiased_holdout = true;
        break;
      }
  }
  d.validate();
  return d;
}

void write_csv(const Dataset& d, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("write_csv: cannot open '" + tmp + "'");
    out << "id";
    for (std::size_t j = 0; j < d.n_cols; ++j) {
      out << ',';
      out << (d.feature_names.empty() ? "f" + std::to_string(j + 1) : d.feature_names[j]);
    }
    if (d.has_labels()) out << ",y";
    if (d.has_accepted()) out << ",a";
    out << '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
      out << d.ids[i];
      for (std::size_t j = 0; j < d.n_cols; ++j) out << ',' << format_double(d.feature(i, j));
      if (d.has_labels()) {
        out << ',';
        if (d.labels[i] != kMissingLabel) out << static_cast<int>(d.labels[i]);
      }
      if (d.has_accepted()) out << ',' << static_cast<int>(d.accepted[i]);
      out << '\n';
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("write_csv: rename to '" + path + "' failed");
}

}  // namespace biaslab
