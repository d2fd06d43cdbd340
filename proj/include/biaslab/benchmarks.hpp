#pragma once

#include <optional>

#include "biaslab/basl.hpp"
#include "biaslab/split.hpp"

namespace biaslab {

enum class CorrectionKind {
  ignore,
  label_all_bad,
  hca,
  parceling,
  reweight_banded,
  heckman_two_step,
  basl
};

// A named bias-correction method plus its settings. The oracle model is not
// a correction: it lives in the report layer behind the sealed-label
// capability.
struct CorrectionMethod {
  CorrectionKind kind = CorrectionKind::ignore;
  double hca_cutoff = 0.5;
  std::size_t parceling_bands = 10;
  double parceling_risk_multiplier = 1.25;
  std::size_t weight_bands = 10;
  BaslConfig basl;
  // Previous scorecard backing the BASL stopping prior; when absent a weak
  // learner fit on train accepts stands in.
  std::optional<Scorecard> prior_scorecard;

  std::string name() const;
  void validate() const;
};

CorrectionKind correction_from_string(const std::string& name);

// Dispatches to the method; every method ultimately fits the strong learner
// on a corrected sample or with weights, except heckman_two_step which
// augments features first. Deterministic given opts.seed.
Scorecard train_corrected(const CorrectionMethod& method, const Split& split,
                          const FitOptions& opts);

// The corrected training sample a method would fit on (for CSV inspection
// and tests). Not defined for heckman_two_step or basl.
Dataset corrected_training_set(const CorrectionMethod& method, const Split& split,
                               const FitOptions& opts);

// Hard cutoff augmentation: weak learner on accepts labels every reject by
// score >= cutoff.
Dataset hca(const Dataset& accepts, const Dataset& rejects, double cutoff,
            const FitOptions& weak_opts);

// Score-band augmentation: rejects labeled bad with probability
// min(1, risk_multiplier * band bad rate); bands are accepts-score quantiles.
Dataset parceling(const Dataset& accepts, const Dataset& rejects, std::size_t n_bands,
                  double risk_multiplier, RngSeed seed, const FitOptions& weak_opts);

// Density-ratio weights over accepts from score-band counts: band edges are
// pooled accepts+rejects quantiles of the accepts-model score, weight =
// (accepts+rejects in band)/(accepts in band), normalized to mean one.
std::vector<double> banded_weights(const Dataset& accepts, const Dataset& rejects,
                                   std::size_t n_bands, const FitOptions& weak_opts);

// Two-step Heckman: probit of acceptance on accepts+rejects, then the
// strong learner on accepts with the inverse Mills ratio as an extra
// feature.
Scorecard heckman_two_step(const Dataset& accepts, const Dataset& rejects,
                           const FitOptions& opts);

// Importance-weighted validation: the metric computed with per-row weights.
MetricValue weighted_validation(const Scorecard& f, const Dataset& validation_accepts,
                                std::span<const double> weights, const MetricSpec& metric);

}  // namespace biaslab
