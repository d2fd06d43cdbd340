#pragma once

#include <array>

#include "biaslab/dataset.hpp"

namespace biaslab {

class SealedLabelKey;

// Four row-disjoint parts. Ground-truth labels of synthetic rejects are kept
// in a sealed side channel: the public `rejects` and `validation` datasets
// never carry reject labels, and the sealed accessors demand a capability
// key that only the oracle/report layer can mint (see oracle.hpp).
class Split {
 public:
  Split() = default;

  // Censors reject labels out of the public parts and seals them.
  // `rejects_full` and `validation_full` may arrive fully labeled.
  static Split from_parts(Dataset train_accepts, Dataset rejects_full,
                          Dataset validation_full, Dataset holdout);

  const Dataset& train_accepts() const { return train_accepts_; }
  const Dataset& rejects() const { return rejects_; }
  const Dataset& validation() const { return validation_; }
  const Dataset& holdout() const { return holdout_; }

  // Sealed ground truth, aligned to rejects()/validation() rows.
  // kMissingLabel marks rows whose truth was never known.
  const std::vector<std::int8_t>& sealed_reject_labels(const SealedLabelKey&) const {
    return sealed_reject_labels_;
  }
  const std::vector<std::int8_t>& sealed_validation_labels(const SealedLabelKey&) const {
    return sealed_validation_labels_;
  }

 private:
  Dataset train_accepts_;
  Dataset rejects_;
  Dataset validation_;
  Dataset holdout_;
  std::vector<std::int8_t> sealed_reject_labels_;
  std::vector<std::int8_t> sealed_validation_labels_;
};

// Capability token for the sealed accessors. Not constructible outside of
// oracle_capability() (oracle.hpp); correction and evaluation code must not
// touch it, which the API-surface test enforces by source scan.
class SealedLabelKey {
 private:
  SealedLabelKey() = default;
  friend SealedLabelKey oracle_capability();
};

// Stratified split of a fully labeled dataset with accept flags into
// (train, validation, holdout) fractions. Fractions apply within accepts
// (stratified by label) and within rejects (unstratified); the holdout is a
// uniform population sample and arrives fully labeled.
Split partition(const Dataset& d, const std::array<double, 3>& fractions, RngSeed seed);

// Mixed validation set -> (labeled accepts, unlabeled rejects), preserving order.
std::pair<Dataset, Dataset> split_validation(const Dataset& validation);

}  // namespace biaslab
