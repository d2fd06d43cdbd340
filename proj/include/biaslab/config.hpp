#pragma once

#include <array>
#include <string>
#include <vector>

#include "biaslab/bayes.hpp"
#include "biaslab/csv.hpp"
#include "biaslab/loop.hpp"

namespace biaslab {

// How the reject-label prior is built during evaluation.
struct PriorSettings {
  std::string source = "previous_scorecard";  // previous_scorecard | constant | oracle
  double constant = 0.3;
  double flip_rate = 0.0;  // corruption applied after construction
  double shift = 0.0;
};

struct LoanEconomics {
  double principal_mean = 375.0;
  double principal_sd = 75.0;
  double interest_mean = 0.1733;
  double interest_sd = 0.03;
  std::vector<double> lgd_grid;
  std::vector<double> acceptance_grid;
  std::size_t n_draws = 10000;

  void validate() const;
};

// One structured JSON document drives every mode; a config hash stamped into
// outputs guarantees traceability.
struct RunConfig {
  std::string mode;
  std::uint64_t seed = 1;
  std::size_t trials = 10;
  std::string output_dir = "out";
  bool emit_charts = true;

  LoopConfig loop;
  std::vector<CorrectionMethod> methods;
  std::vector<std::string> eval_strategies;
  std::vector<MetricSpec> metrics;
  PriorSettings prior;
  BayesConfig bayes;
  LoanEconomics econ;

  std::string sweep_axis = "acceptance_rate";
  std::vector<double> sweep_grid;
  bool sweep_with_basl = false;

  bool include_oracle = true;          // add the sealed-label oracle model to experiment2
  std::size_t eval_weight_bands = 10;  // bands for the reweighted validation strategy

  // real-data modes
  std::string data_csv;
  CsvSchema schema;
  std::string scorecard_path;
  std::array<double, 3> partition_fractions{0.5, 0.25, 0.25};

  std::string canonical_json;  // sorted-key dump used for hashing

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  void validate() const;
  std::uint64_t hash() const;
};

// Desk-scale defaults shared by shipped configs and tests.
RunConfig default_run_config(const std::string& mode);

}  // namespace biaslab
