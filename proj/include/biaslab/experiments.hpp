#pragma once

#include "biaslab/config.hpp"
#include "biaslab/impact.hpp"
#include "biaslab/report.hpp"

namespace biaslab {

// Experiment I machinery for one trial: each strategy's estimate of the
// scorecard's metric plus the truth on the labeled holdout.
//   accepts_only - metric on the validation accepts
//   reweighted   - importance-weighted metric via banded weights
//   bayesian     - bayesian_metric on validation accepts + rejects
std::vector<ReportRow> evaluate_strategies(const Split& split, const Scorecard& f,
                                           const Scorecard& decision_model,
                                           const std::vector<std::string>& strategies,
                                           const std::vector<MetricSpec>& metrics,
                                           const PriorSettings& prior_cfg,
                                           const BayesConfig& bayes, std::size_t weight_bands,
                                           const FitOptions& weak_opts, std::size_t trial,
                                           RngSeed seed);

// Experiment I: evaluation-strategy RMSE across trials (one acceptance-loop
// simulation per trial), ranked by absolute estimation error.
RunReport experiment_evaluation(const RunConfig& cfg);

// Experiment II: training-method comparison on the labeled holdout across
// trials, ranked by metric value; optionally includes the sealed-label
// oracle model.
RunReport experiment_training(const RunConfig& cfg);

// Mode drivers writing the mode's output files into cfg.output_dir.
void run_simulate(const RunConfig& cfg);
void run_experiment1(const RunConfig& cfg);
void run_experiment2(const RunConfig& cfg);
void run_sensitivity(const RunConfig& cfg);
void run_impact(const RunConfig& cfg);
void run_basl_train(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg);

// Dispatch by cfg.mode. Throws ConfigError for config problems.
void run_mode(const RunConfig& cfg);

}  // namespace biaslab
