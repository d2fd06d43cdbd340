#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biaslab/rng.hpp"

namespace biaslab {

inline constexpr std::int8_t kMissingLabel = -1;

// Feature matrix with optional per-row binary labels (1 = bad/default) and
// accept flags (1 = outcome observed). The universal currency of every
// operation. Treated as immutable once built; all "mutation" helpers return
// new values, so instances are safe to share across threads.
struct Dataset {
  std::size_t n_cols = 0;
  std::vector<double> features;           // row-major, n_rows x n_cols
  std::vector<std::int8_t> labels;        // empty, or per-row {0,1,kMissingLabel}
  std::vector<std::int8_t> accepted;      // empty, or per-row {0,1}
  std::vector<std::int64_t> ids;          // stable row identifiers
  std::vector<std::string> feature_names; // recorded column order
  bool unbiased_holdout = false;          // labels allowed on non-accepted rows

  std::size_t rows() const { return n_cols == 0 ? 0 : features.size() / n_cols; }
  std::size_t cols() const { return n_cols; }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_cols, n_cols};
  }
  double feature(std::size_t i, std::size_t j) const { return features[i * n_cols + j]; }

  bool has_labels() const { return !labels.empty(); }
  bool has_accepted() const { return !accepted.empty(); }
  bool has_label(std::size_t i) const { return !labels.empty() && labels[i] != kMissingLabel; }
  bool fully_labeled() const;

  // Throws ConfigError when a structural invariant is violated.
  void validate() const;

  Dataset subset(const std::vector<std::size_t>& row_idx) const;
  Dataset without_labels() const;
  Dataset with_labels(std::vector<std::int8_t> new_labels) const;
  Dataset with_accepted(std::vector<std::int8_t> flags) const;
  Dataset keep_columns(const std::vector<std::size_t>& col_idx) const;

  // Observed bad rate over rows with a label.
  double bad_rate() const;

  static Dataset concat(const Dataset& a, const Dataset& b);
};

Dataset make_dataset(std::size_t n_cols, std::vector<double> features,
                     std::vector<std::int8_t> labels = {},
                     std::vector<std::int8_t> accepted = {},
                     std::vector<std::int64_t> ids = {});

// n rows resampled with replacement; the draw index is packed into the high
// bits of each id so duplicates stay distinguishable while the source row
// remains recoverable from the low 32 bits.
Dataset bootstrap(const Dataset& d, RngSeed seed);

std::int64_t bootstrap_source_id(std::int64_t annotated_id);

}  // namespace biaslab
