#include "biaslab/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "biaslab/common.hpp"

namespace biaslab {

bool Dataset::fully_labeled() const {
  if (labels.empty()) return rows() == 0;
  return std::none_of(labels.begin(), labels.end(),
                      [](std::int8_t v) { return v == kMissingLabel; });
}

void Dataset::validate() const {
  const std::size_t n = rows();
  if (n_cols > 0 && features.size() % n_cols != 0)
    throw ConfigError("dataset: feature buffer size is not a multiple of the column count");
  if (!labels.empty() && labels.size() != n)
    throw ConfigError("dataset: label vector length differs from row count");
  if (!accepted.empty() && accepted.size() != n)
    throw ConfigError("dataset: accepted vector length differs from row count");
  if (ids.size() != n) throw ConfigError("dataset: id vector length differs from row count");
  if (!feature_names.empty() && feature_names.size() != n_cols)
    throw ConfigError("dataset: feature name count differs from column count");
  for (double v : features)
    if (!std::isfinite(v)) throw ConfigError("dataset: non-finite feature value");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0 && labels[i] != 1 && labels[i] != kMissingLabel)
      throw ConfigError("dataset: label outside {0,1} at row " + std::to_string(i));
  for (std::size_t i = 0; i < accepted.size(); ++i)
    if (accepted[i] != 0 && accepted[i] != 1)
      throw ConfigError("dataset: accepted flag outside {0,1} at row " + std::to_string(i));
  if (!unbiased_holdout && !labels.empty() && !accepted.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] != kMissingLabel && accepted[i] != 1)
        throw ConfigError("dataset: labeled row " + std::to_string(i) +
                          " is not accepted and the dataset is not an unbiased holdout");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& row_idx) const {
  Dataset out;
  out.n_cols = n_cols;
  out.feature_names = feature_names;
  out.unbiased_holdout = unbiased_holdout;
  out.features.reserve(row_idx.size() * n_cols);
  out.ids.reserve(row_idx.size());
  if (!labels.empty()) out.labels.reserve(row_idx.size());
  if (!accepted.empty()) out.accepted.reserve(row_idx.size());
  for (std::size_t i : row_idx) {
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.ids.push_back(ids[i]);
    if (!labels.empty()) out.labels.push_back(labels[i]);
    if (!accepted.empty()) out.accepted.push_back(accepted[i]);
  }
  return out;
}

Dataset Dataset::without_labels() const {
  Dataset out = *this;
  out.labels.clear();
  return out;
}

Dataset Dataset::with_labels(std::vector<std::int8_t> new_labels) const {
  if (new_labels.size() != rows())
    throw ConfigError("with_labels: label vector length differs from row count");
  Dataset out = *this;
  out.labels = std::move(new_labels);
  return out;
}

Dataset Dataset::with_accepted(std::vector<std::int8_t> flags) const {
  if (flags.size() != rows())
    throw ConfigError("with_accepted: flag vector length differs from row count");
  Dataset out = *this;
  out.accepted = std::move(flags);
  return out;
}

Dataset Dataset::keep_columns(const std::vector<std::size_t>& col_idx) const {
  Dataset out;
  out.n_cols = col_idx.size();
  out.labels = labels;
  out.accepted = accepted;
  out.ids = ids;
  out.unbiased_holdout = unbiased_holdout;
  const std::size_t n = rows();
  out.features.reserve(n * col_idx.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : col_idx) {
      if (j >= n_cols) throw ConfigError("keep_columns: column index out of range");
      out.features.push_back(feature(i, j));
    }
  if (!feature_names.empty())
    for (std::size_t j : col_idx) out.feature_names.push_back(feature_names[j]);
  return out;
}

double Dataset::bad_rate() const {
  std::size_t n_labeled = 0, n_bad = 0;
  for (std::int8_t v : labels) {
    if (v == kMissingLabel) continue;
    ++n_labeled;
    n_bad += (v == 1);
  }
  return n_labeled == 0 ? 0.0 : static_cast<double>(n_bad) / static_cast<double>(n_labeled);
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.n_cols != b.n_cols) throw ConfigError("concat: column counts differ");
  Dataset out = a;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
  auto merge_flags = [&](std::vector<std::int8_t>& dst, const std::vector<std::int8_t>& lhs,
                         const std::vector<std::int8_t>& rhs, std::int8_t fill) {
    if (lhs.empty() && rhs.empty()) {
      dst.clear();
      return;
    }
    dst = lhs.empty() ? std::vector<std::int8_t>(a.rows(), fill) : lhs;
    if (rhs.empty())
      dst.insert(dst.end(), b.rows(), fill);
    else
      dst.insert(dst.end(), rhs.begin(), rhs.end());
  };
  merge_flags(out.labels, a.labels, b.labels, kMissingLabel);
  merge_flags(out.accepted, a.accepted, b.accepted, 0);
  out.unbiased_holdout = a.unbiased_holdout && b.unbiased_holdout;
  return out;
}

Dataset make_dataset(std::size_t n_cols, std::vector<double> features,
                     std::vector<std::int8_t> labels, std::vector<std::int8_t> accepted,
                     std::vector<std::int64_t> ids) {
  Dataset d;
  d.n_cols = n_cols;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.accepted = std::move(accepted);
  if (ids.empty()) {
    d.ids.resize(d.rows());
    for (std::size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = static_cast<std::int64_t>(i);
  } else {
    d.ids = std::move(ids);
  }
  d.validate();
  return d;
}

Dataset bootstrap(const Dataset& d, RngSeed seed) {
  const std::size_t n = d.rows();
  if (n == 0) throw ConfigError("bootstrap: empty dataset");
  for (std::int64_t id : d.ids)
    if (id < 0 || id > 0xffffffffLL)
      throw ConfigError("bootstrap: row ids must fit in 32 bits for draw-index annotation");
  Rng rng(seed);
  std::vector<std::size_t> draws(n);
  for (std::size_t i = 0; i < n; ++i) draws[i] = rng.uniform_index(n);
  Dataset out = d.subset(draws);
  for (std::size_t i = 0; i < n; ++i)
    out.ids[i] = (static_cast<std::int64_t>(i) << 32) | d.ids[draws[i]];
  return out;
}

std::int64_t bootstrap_source_id(std::int64_t annotated_id) {
  return annotated_id & 0xffffffffLL;
}

}  // namespace biaslab
