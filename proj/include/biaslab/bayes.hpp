#pragma once

#include <span>
#include <string>

#include "biaslab/dataset.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/scorecard.hpp"

namespace biaslab {

// Label prior P(y=1|X) over reject rows, aligned by id.
struct Prior {
  enum class Source { previous_scorecard, original_scores, constant, oracle, corrupted };

  std::vector<double> probs;
  std::vector<std::int64_t> ids;
  Source source = Source::previous_scorecard;

  void validate() const;
};

std::string prior_source_name(Prior::Source s);

struct BayesConfig {
  std::size_t j_max = 1000;
  double epsilon = 1e-4;           // threshold on |E_j - E_{j-1}|
  std::size_t min_iterations = 10; // floor before convergence may trigger
  RngSeed seed{};

  void validate() const;
};

struct BayesDiagnostics {
  std::size_t iterations = 0;  // Monte-Carlo draws consumed
  std::size_t skipped = 0;     // draws on which the metric was undefined
  std::vector<double> draw_values;
  std::vector<double> running_mean;
};

// Bayesian extension BM(f, H, tau): pseudo-label rejects from the prior,
// average the metric over label realizations, stop when the running mean
// converges. Rejects empty reduces to the plain metric, bit-equal.
//
// Draw j uses its own substream, so iterations evaluate in parallel blocks
// and the result is identical for any thread count.
MetricValue bayesian_metric(const Scorecard& f, const Dataset& accepts, const Dataset& rejects,
                            const Prior& prior, const MetricSpec& metric, const BayesConfig& cfg,
                            BayesDiagnostics* diag = nullptr);

// Prior from rescoring rejects with a scorecard; probabilities clipped to
// [1e-6, 1-1e-6].
Prior build_prior(const Dataset& rejects, const Scorecard& source);

// Prior from stored scores (e.g. the original decision scores), clipped the
// same way.
Prior build_prior_from_scores(const Dataset& rejects, std::span<const double> scores,
                              Prior::Source source = Prior::Source::original_scores);

// Degenerate exact-label prior for oracle comparisons; entries stay 0/1.
Prior make_oracle_prior(const Dataset& rejects, std::span<const std::int8_t> true_labels);

// Per-entry random complement with probability flip_rate, then a level
// shift, clipped to [0,1].
Prior corrupt_prior(const Prior& p, double flip_rate, double shift, RngSeed seed);

// Convergence trace (iteration, draw value, running mean) for plots.
void write_bayes_trace_csv(const BayesDiagnostics& diag, const std::string& path);

}  // namespace biaslab
