#pragma once

#include <string>

#include "biaslab/dataset.hpp"

namespace biaslab {

// Column-role map for CSV ingestion. Empty string = column absent. Columns
// not named here are numeric features, kept in file order.
struct CsvSchema {
  std::string label_column;
  std::string accepted_column;
  std::string id_column;
};

// One header row, comma separator, UTF-8, '.' decimal. Rows with missing
// cells are rejected (imputation is out of scope).
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

void write_csv(const Dataset& d, const std::string& path);

}  // namespace biaslab
