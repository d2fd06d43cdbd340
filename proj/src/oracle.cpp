#include "biaslab/oracle.hpp"

#include "biaslab/common.hpp"

namespace biaslab {

SealedLabelKey oracle_capability() { return SealedLabelKey{}; }

Dataset oracle_training_set(const Split& s) {
  const auto key = oracle_capability();
  const auto& truth = s.sealed_reject_labels(key);
  for (std::int8_t v : truth)
    if (v == kMissingLabel)
      throw ConfigError("oracle_training_set: reject ground truth unavailable");
  Dataset rejects = s.rejects().with_labels(truth);
  rejects.unbiased_holdout = true;
  Dataset out = Dataset::concat(s.train_accepts(), rejects);
  out.unbiased_holdout = true;
  return out;
}

Dataset oracle_labeled_validation(const Split& s) {
  const auto key = oracle_capability();
  const auto& truth = s.sealed_validation_labels(key);
  for (std::int8_t v : truth)
    if (v == kMissingLabel)
      throw ConfigError("oracle_labeled_validation: validation ground truth unavailable");
  Dataset out = s.validation().with_labels(truth);
  out.unbiased_holdout = true;
  return out;
}

std::vector<std::int8_t> oracle_reject_labels(const Split& s) {
  return s.sealed_reject_labels(oracle_capability());
}

}  // namespace biaslab
