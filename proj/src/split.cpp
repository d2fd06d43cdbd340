#include "biaslab/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

// Largest-remainder allocation of n items over fractions (sums exactly to n).
std::array<std::size_t, 3> allocate_counts(std::size_t n, const std::array<double, 3>& f) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rema{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = f[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-12));
    rema[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rema[i] > rema[best]) best = i;
    ++counts[best];
    rema[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

Split Split::from_parts(Dataset train_accepts, Dataset rejects_full, Dataset validation_full,
                        Dataset holdout) {
  Split s;

  s.sealed_reject_labels_ = rejects_full.has_labels()
                                ? rejects_full.labels
                                : std::vector<std::int8_t>(rejects_full.rows(), kMissingLabel);
  rejects_full.labels.clear();
  if (!rejects_full.has_accepted())
    rejects_full.accepted.assign(rejects_full.rows(), 0);

  s.sealed_validation_labels_ =
      validation_full.has_labels() ? validation_full.labels
                                   : std::vector<std::int8_t>(validation_full.rows(), kMissingLabel);
  if (validation_full.has_labels() && validation_full.has_accepted()) {
    for (std::size_t i = 0; i < validation_full.rows(); ++i)
      if (validation_full.accepted[i] == 0) validation_full.labels[i] = kMissingLabel;
  }
  validation_full.unbiased_holdout = false;

  if (holdout.has_labels()) holdout.unbiased_holdout = true;

  s.train_accepts_ = std::move(train_accepts);
  s.rejects_ = std::move(rejects_full);
  s.validation_ = std::move(validation_full);
  s.holdout_ = std::move(holdout);

  s.train_accepts_.validate();
  s.rejects_.validate();
  s.validation_.validate();
  s.holdout_.validate();

  std::set<std::int64_t> seen;
  for (const Dataset* part : {&s.train_accepts_, &s.rejects_, &s.validation_, &s.holdout_})
    for (std::int64_t id : part->ids)
      if (!seen.insert(id).second)
        throw ConfigError("split: parts are not row-disjoint (duplicate id " +
                          std::to_string(id) + ")");
  return s;
}

Split partition(const Dataset& d, const std::array<double, 3>& fractions, RngSeed seed) {
  double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("partition: fractions sum to " + format_double(sum) + ", expected 1");
  for (double f : fractions)
    if (f < 0) throw ConfigError("partition: negative fraction");
  if (!d.fully_labeled() || d.rows() == 0)
    throw ConfigError("partition: dataset must be fully labeled");
  if (!d.has_accepted()) throw ConfigError("partition: dataset must carry accepted flags");

  std::vector<std::size_t> accept_bad, accept_good, reject_idx;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.accepted[i] == 1)
      (d.labels[i] == 1 ? accept_bad : accept_good).push_back(i);
    else
      reject_idx.push_back(i);
  }

  Rng rng(seed);
  Rng shuffle_bad = rng.child(1), shuffle_good = rng.child(2), shuffle_rej = rng.child(3);
  shuffle_bad.shuffle(accept_bad);
  shuffle_good.shuffle(accept_good);
  shuffle_rej.shuffle(reject_idx);

  // Per-part row indices: 0 train, 1 validation, 2 holdout.
  std::array<std::vector<std::size_t>, 3> accept_parts, reject_parts;
  auto deal = [&](const std::vector<std::size_t>& pool,
                  std::array<std::vector<std::size_t>, 3>& parts) {
    auto counts = allocate_counts(pool.size(), fractions);
    std::size_t pos = 0;
    for (int p = 0; p < 3; ++p)
      for (std::size_t c = 0; c < counts[p]; ++c) parts[p].push_back(pool[pos++]);
  };
  deal(accept_bad, accept_parts);
  deal(accept_good, accept_parts);
  deal(reject_idx, reject_parts);

  for (int p = 0; p < 3; ++p) {
    if (fractions[p] > 0 && accept_parts[p].empty())
      throw ConfigError("partition: accepts part " + std::to_string(p) +
                        " is empty after rounding");
    std::sort(accept_parts[p].begin(), accept_parts[p].end());
    std::sort(reject_parts[p].begin(), reject_parts[p].end());
  }

  Dataset train_accepts = d.subset(accept_parts[0]);
  train_accepts.unbiased_holdout = false;

  Dataset rejects_full = d.subset(reject_parts[0]);
  rejects_full.unbiased_holdout = true;  // transient: carries truth until sealed

  std::vector<std::size_t> val_rows = accept_parts[1];
  val_rows.insert(val_rows.end(), reject_parts[1].begin(), reject_parts[1].end());
  std::sort(val_rows.begin(), val_rows.end());
  Dataset validation_full = d.subset(val_rows);
  validation_full.unbiased_holdout = true;  // transient, censored by from_parts

  std::vector<std::size_t> hold_rows = accept_parts[2];
  hold_rows.insert(hold_rows.end(), reject_parts[2].begin(), reject_parts[2].end());
  std::sort(hold_rows.begin(), hold_rows.end());
  Dataset holdout = d.subset(hold_rows);
  holdout.unbiased_holdout = true;

  return Split::from_parts(std::move(train_accepts), std::move(rejects_full),
                           std::move(validation_full), std::move(holdout));
}

std::pair<Dataset, Dataset> split_validation(const Dataset& validation) {
  if (!validation.has_accepted())
    throw ConfigError("split_validation: validation set lacks accepted flags");
  std::vector<std::size_t> acc, rej;
  for (std::size_t i = 0; i < validation.rows(); ++i)
    (validation.accepted[i] == 1 ? acc : rej).push_back(i);
  Dataset accepts = validation.subset(acc);
  Dataset rejects = validation.subset(rej).without_labels();
  return {std::move(accepts), std::move(rejects)};
}

}  // namespace biaslab
