#pragma once

#include "biaslab/bayes.hpp"
#include "biaslab/dataset.hpp"
#include "biaslab/iforest.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/scorecard.hpp"

namespace biaslab {

// Bias-aware self-learning meta-parameters: filtering percentiles, the
// per-iteration sampling fraction, the labeling percentiles with the
// imbalance multiplier, the labeling budget, and the Bayesian stopping
// criterion.
struct BaslConfig {
  double beta_upper = 0.1;  // most-novel fraction of rejects to drop
  double beta_lower = 0.1;  // least-novel fraction to drop
  double rho = 0.5;         // fraction of remaining rejects sampled per iteration
  double gamma = 0.05;      // good-side labeling percentile
  double theta = 2.0;       // imbalance multiplier: bad-side percentile = gamma*theta
  std::size_t j_max = 10;   // max labeling iterations
  std::size_t patience = 1; // non-improving iterations tolerated before stopping

  MetricSpec stop_metric = MetricSpec::abr();
  BayesConfig bayes;
  FitOptions weak_opts;
  FitOptions strong_opts;
  std::size_t iforest_trees = 100;
  std::size_t iforest_subsample = 256;
  RngSeed seed{};

  void validate() const;
};

struct BaslThresholds {
  bool fixed = false;  // absolute cutoffs recorded after iteration 1
  double good_max_score = 0.0;
  double bad_min_score = 1.0;
};

struct BaslIterationRecord {
  std::size_t iteration = 0;  // 0 = accepts-only baseline
  std::size_t n_good = 0;
  std::size_t n_bad = 0;
  double stop_value = 0.0;
  bool improved = false;
};

struct BaslState {
  Dataset augmented_train;
  std::vector<std::int8_t> origin;  // per augmented row: 0 accept, 1 inferred reject
  Dataset remaining_rejects;
  BaslThresholds thresholds;
  std::vector<BaslIterationRecord> history;
  std::size_t labeling_iteration = 0;
};

struct LabelingOutcome {
  std::size_t n_good = 0;
  std::size_t n_bad = 0;
  std::size_t total() const { return n_good + n_bad; }
};

struct BaslResult {
  Scorecard model;  // best-scoring strong learner, not necessarily the last
  BaslState state;
  std::size_t best_iteration = 0;
};

// Novelty filter: isolation forest on accepts scores the rejects; drops the
// top beta_upper fraction (most novel) and the bottom beta_lower fraction
// (least novel). Kept rows preserve input order. Returns (kept, dropped).
std::pair<Dataset, Dataset> filter_rejects(const Dataset& accepts, const Dataset& rejects,
                                           double beta_upper, double beta_lower,
                                           std::size_t n_trees, std::size_t subsample,
                                           RngSeed seed);

// One labeling pass: sample rho*m of the remaining rejects, score with the
// weak learner, pseudo-label the tails (absolute thresholds after iteration
// one), and move the selections into the augmented train set. An empty
// selection is a valid outcome signaling the caller to stop.
LabelingOutcome labeling_step(BaslState& state, const Scorecard& weak, const BaslConfig& cfg);

// The full framework: filter, iterate weak-learner labeling, retrain the
// strong learner, stop early via the Bayesian metric on the mixed
// validation set, return the best-scoring model.
BaslResult basl_fit(const Dataset& accepts, const Dataset& rejects, const Dataset& validation,
                    const Prior& prior, const BaslConfig& cfg);

void write_basl_history_csv(const std::vector<BaslIterationRecord>& history,
                            const std::string& path);

}  // namespace biaslab
