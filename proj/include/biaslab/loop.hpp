#pragma once

#include "biaslab/benchmarks.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/split.hpp"
#include "biaslab/synth.hpp"

namespace biaslab {

enum class AcceptanceMode {
  rate,       // accept the lowest-score fraction of each batch
  threshold,  // accept score <= tau
  random      // accept at random (MCAR reference)
};

struct LoopConfig {
  MixtureSpec mixture;
  MnarSpec mnar;
  std::size_t batch_size = 800;
  std::size_t iterations = 30;
  AcceptanceMode acceptance_mode = AcceptanceMode::rate;
  double acceptance_value = 0.25;  // rate, or tau in threshold mode
  std::size_t retrain_every = 1;
  std::size_t holdout_size = 4000;
  std::size_t warmup = 5;  // initial random-acceptance batches
  double validation_fraction = 0.25;
  FitOptions scorecard_opts;
  RngSeed seed{};

  void validate() const;
};

struct LoopIterationRecord {
  std::size_t iteration = 0;
  std::size_t n_accepted = 0;
  double accept_bad_rate = 0.0;  // among this batch's accepts
  std::size_t cum_accepts = 0;
  double abr_fa = 0.0, auc_fa = 0.0;  // holdout metrics, biased model
  double abr_fo = 0.0, auc_fo = 0.0;  // oracle model
  double abr_fc = 0.0, auc_fc = 0.0;  // corrected model (NaN when absent)
};

struct LoopTrace {
  std::vector<LoopIterationRecord> records;
};

struct LoopResult {
  LoopTrace trace;
  Split split;              // accumulated data, reject truth sealed
  Scorecard decision_model; // f_a: the scorecard that made the decisions
  Scorecard oracle_model;   // f_o: trained with true labels of all rows
};

// The acceptance loop: batch arrival, scorecard-based accept/reject, label
// revelation for accepts, periodic retraining, holdout tracking. When a
// correction method is given, the corrected model f_c is retrained at the
// same cadence and traced.
LoopResult run_loop(const LoopConfig& cfg, const CorrectionMethod* correction = nullptr);

void write_trace_csv(const LoopTrace& trace, const std::string& path);

// --- sensitivity sweeps -----------------------------------------------

enum class SweepAxis {
  acceptance_rate,
  covariance_range,
  bad_rate,
  overwrite_rate,
  validation_mix,
  prior_corruption
};

SweepAxis sweep_axis_from_string(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

// Long-format sweep cell: one (axis value, trial, method, metric) row.
struct SweepCell {
  double axis_value = 0.0;
  std::size_t trial = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
  bool failed = false;
};

struct SweepOptions {
  bool with_basl = false;            // also train BASL on training axes
  CorrectionMethod basl_method;      // settings when with_basl
  std::vector<MetricSpec> metrics;   // evaluation metrics (default: abr)
  BayesConfig bayes;
  double prior_shift = 0.0;          // prior_corruption axis: shift added per flip grid value
};

// Runs the relevant experiment per grid value and trial and emits a table
// ready for plotting. Infeasible cells are recorded as failed and the sweep
// continues.
std::vector<SweepCell> sensitivity_sweep(SweepAxis axis, const std::vector<double>& grid,
                                         const LoopConfig& base, std::size_t trials,
                                         const SweepOptions& opts = {});

void write_sweep_csv(const std::vector<SweepCell>& cells, SweepAxis axis,
                     const std::string& path);

}  // namespace biaslab
