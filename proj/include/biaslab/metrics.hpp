#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace biaslab {

enum class MetricName { auc, brier, pauc, abr };

enum class Orientation { higher_better, lower_better };

// A named measure plus meta-parameters: the FNR window for pauc, the
// acceptance-rate window and grid step for abr.
struct MetricSpec {
  MetricName name = MetricName::auc;
  double window_lo = 0.0;
  double window_hi = 1.0;
  double abr_step = 0.01;

  static MetricSpec auc() { return {MetricName::auc}; }
  static MetricSpec brier() { return {MetricName::brier}; }
  static MetricSpec pauc(double lo = 0.0, double hi = 0.2) { return {MetricName::pauc, lo, hi}; }
  static MetricSpec abr(double lo = 0.2, double hi = 0.4, double step = 0.01) {
    return {MetricName::abr, lo, hi, step};
  }

  void validate() const;
  std::string label() const;
};

MetricName metric_from_string(const std::string& name);
Orientation metric_orientation(MetricName name);

struct MetricValue {
  double value = 0.0;
  std::size_t n_eval = 0;
  Orientation orientation = Orientation::higher_better;
};

using Scores = std::span<const double>;
using Labels = std::span<const std::int8_t>;
using Weights = std::span<const double>;

// Probability that a random bad scores above a random good, ties half.
// Rank-sum, O(n log n).
MetricValue auc(Scores scores, Labels labels);

// Area under the ROC curve restricted to FNR in [lo, hi], normalized by the
// window width; trapezoidal with linear interpolation at the window edges.
MetricValue pauc(Scores scores, Labels labels, double lo, double hi);

// Mean squared error of probabilistic predictions.
MetricValue brier(Scores scores, Labels labels);

// Bad rate among the floor(alpha*n) lowest-score rows, averaged over the
// alpha grid; ties broken by stable input order.
MetricValue abr(Scores scores, Labels labels, double lo, double hi, double step);

MetricValue evaluate_metric(const MetricSpec& spec, Scores scores, Labels labels);

// Importance-weighted versions. Weighted AUC/PAUC use weighted pair counts,
// weighted ABR uses weighted acceptance mass.
MetricValue weighted_auc(Scores scores, Labels labels, Weights w);
MetricValue weighted_pauc(Scores scores, Labels labels, Weights w, double lo, double hi);
MetricValue weighted_brier(Scores scores, Labels labels, Weights w);
MetricValue weighted_abr(Scores scores, Labels labels, Weights w, double lo, double hi,
                         double step);
MetricValue evaluate_weighted_metric(const MetricSpec& spec, Scores scores, Labels labels,
                                     Weights w);

double rmse_of_estimates(std::span<const double> estimates, std::span<const double> truth);

}  // namespace biaslab
