#pragma once

#include "biaslab/split.hpp"

namespace biaslab {

// The only mint for the sealed-label capability. Correction and evaluation
// methods must never call this; it exists for the oracle model and for
// report-layer audits (RMSE vs. truth, label-accuracy audits).
SealedLabelKey oracle_capability();

// train_accepts plus rejects with their true labels revealed: the training
// set of the oracle scorecard f_o.
Dataset oracle_training_set(const Split& s);

// Validation set with every row's true label revealed (unbiased-holdout
// flagged), for oracle priors and truth computations in reports.
Dataset oracle_labeled_validation(const Split& s);

// True labels of the reject pool, aligned to s.rejects() rows.
std::vector<std::int8_t> oracle_reject_labels(const Split& s);

}  // namespace biaslab
